#include "sbnn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "sbnn/error.hpp"

namespace sbnn {

static_assert(std::endian::native == std::endian::little,
              "checkpoint encoding assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'S', 'B', 'N', 'N', 'C', 'K', 'P', 'T'};

class Writer {
 public:
  template <class T>
  void put(const T& v) {
    const auto* b = reinterpret_cast<const char*>(&v);
    buf_.append(b, sizeof(T));
  }
  void put_doubles(const std::vector<double>& v) {
    buf_.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
  }
  void raw(const char* p, std::size_t n) { buf_.append(p, n); }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(const std::string& b) : buf_(b) {}
  template <class T>
  T get() {
    T v;
    need(sizeof(T));
    std::memcpy(&v, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::vector<double> get_doubles(std::size_t n) {
    need(n * sizeof(double));
    std::vector<double> v(n);
    std::memcpy(v.data(), buf_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
    return v;
  }
  std::vector<std::uint8_t> get_bytes(std::size_t n) {
    need(n);
    std::vector<std::uint8_t> v(buf_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                buf_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return v;
  }
  bool done() const { return pos_ == buf_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > buf_.size()) fail(ErrorKind::io, "checkpoint is truncated");
  }
  const std::string& buf_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const Checkpoint& ckpt) {
  const Topology& t = ckpt.model.topology;
  const VariationalParams& vp = ckpt.params;
  t.validate();
  vp.validate();
  require(vp.size() == t.param_count(), "checkpoint state does not match its topology");
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint32_t>(kCanonicalOrderId);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(t.hidden));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(t.head));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(t.layer_sizes.size()));
  for (std::size_t s : t.layer_sizes) w.put<std::uint64_t>(s);
  w.put<double>(ckpt.model.prior.pi);
  w.put<double>(ckpt.model.prior.tau1);
  w.put<double>(ckpt.model.prior.tau0);
  w.put<double>(ckpt.model.noise_variance);
  w.put<std::uint64_t>(vp.size());
  w.put_doubles(vp.m);
  w.put_doubles(vp.rho);
  w.put_doubles(vp.p);
  w.put<std::uint8_t>(vp.keep.empty() ? 0 : 1);
  if (!vp.keep.empty()) w.raw(reinterpret_cast<const char*>(vp.keep.data()), vp.keep.size());
  return w.take();
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    fail(ErrorKind::io, "not a checkpoint file (bad magic)");
  Reader r(bytes);
  r.get_bytes(sizeof kMagic);
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    fail(ErrorKind::io, "unsupported checkpoint version " + std::to_string(version));
  if (r.get<std::uint32_t>() != kCanonicalOrderId)
    fail(ErrorKind::io, "checkpoint uses an unknown parameter order");
  Checkpoint c;
  const auto act = r.get<std::uint32_t>();
  const auto head = r.get<std::uint32_t>();
  if (act > 2 || head > 1) fail(ErrorKind::io, "checkpoint has an unknown activation or head");
  c.model.topology.hidden = static_cast<Activation>(act);
  c.model.topology.head = static_cast<OutputHead>(head);
  const auto k = r.get<std::uint32_t>();
  if (k > 1024) fail(ErrorKind::io, "checkpoint layer count is implausible");
  for (std::uint32_t i = 0; i < k; ++i)
    c.model.topology.layer_sizes.push_back(static_cast<std::size_t>(r.get<std::uint64_t>()));
  c.model.topology.validate();
  c.model.prior.pi = r.get<double>();
  c.model.prior.tau1 = r.get<double>();
  c.model.prior.tau0 = r.get<double>();
  c.model.prior.validate();
  c.model.noise_variance = r.get<double>();
  const auto m = static_cast<std::size_t>(r.get<std::uint64_t>());
  if (m != c.model.topology.param_count())
    fail(ErrorKind::io, "checkpoint parameter count disagrees with its topology");
  c.params.m = r.get_doubles(m);
  c.params.rho = r.get_doubles(m);
  c.params.p = r.get_doubles(m);
  const auto has_mask = r.get<std::uint8_t>();
  if (has_mask > 1) fail(ErrorKind::io, "checkpoint mask flag is invalid");
  if (has_mask) c.params.keep = r.get_bytes(m);
  if (!r.done()) fail(ErrorKind::io, "checkpoint has trailing bytes");
  return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  const std::string bytes = encode_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot write checkpoint '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::io, "failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open checkpoint '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace sbnn
