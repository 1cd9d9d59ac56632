#include "sbnn/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>

#include "sbnn/error.hpp"

namespace sbnn {

std::size_t Topology::param_count() const {
  std::size_t m = 0;
  for (std::size_t l = 1; l < layer_sizes.size(); ++l)
    m += layer_sizes[l - 1] * layer_sizes[l] + layer_sizes[l];
  return m;
}

std::size_t Topology::weight_offset(std::size_t layer) const {
  std::size_t off = 0;
  for (std::size_t l = 0; l < layer; ++l)
    off += layer_sizes[l] * layer_sizes[l + 1] + layer_sizes[l + 1];
  return off;
}

std::size_t Topology::bias_offset(std::size_t layer) const {
  return weight_offset(layer) + layer_sizes[layer] * layer_sizes[layer + 1];
}

std::vector<bool> Topology::bias_flags() const {
  std::vector<bool> flags(param_count(), false);
  for (std::size_t l = 0; l < weight_layers(); ++l) {
    const std::size_t b = bias_offset(l);
    for (std::size_t j = 0; j < layer_sizes[l + 1]; ++j) flags[b + j] = true;
  }
  return flags;
}

void Topology::validate() const {
  if (layer_sizes.size() < 3)
    fail(ErrorKind::invalid_argument,
         "topology needs inputs, at least one hidden layer and outputs; got " +
             std::to_string(layer_sizes.size()) + " layer sizes");
  for (std::size_t s : layer_sizes)
    if (s == 0) fail(ErrorKind::invalid_argument, "topology layer sizes must be >= 1");
}

std::string Topology::describe() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < layer_sizes.size(); ++i) os << (i ? "-" : "") << layer_sizes[i];
  return os.str();
}

Topology make_topology(std::size_t inputs, std::vector<std::size_t> hidden, std::size_t outputs,
                       Activation act, OutputHead head) {
  Topology t;
  t.layer_sizes.push_back(inputs);
  t.layer_sizes.insert(t.layer_sizes.end(), hidden.begin(), hidden.end());
  t.layer_sizes.push_back(outputs);
  t.hidden = act;
  t.head = head;
  t.validate();
  return t;
}

std::uint64_t fingerprint(std::span<const double> w) {
  // FNV-1a over the raw bytes.
  std::uint64_t h = 1469598103934665603ULL;
  for (double v : w) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int k = 0; k < 8; ++k) {
      h ^= (bits >> (8 * k)) & 0xffU;
      h *= 1099511628211ULL;
    }
  }
  return h ^ w.size();
}

double activate(Activation act, double z) {
  switch (act) {
    case Activation::relu: return z > 0.0 ? z : 0.0;
    case Activation::tanh: return std::tanh(z);
    case Activation::identity: return z;
  }
  return z;
}

double activate_derivative(Activation act, double z) {
  switch (act) {
    case Activation::relu: return z > 0.0 ? 1.0 : 0.0;  // subgradient 0 at the kink
    case Activation::tanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::identity: return 1.0;
  }
  return 1.0;
}

namespace {

void check_weights(const Topology& t, std::span<const double> w) {
  if (w.size() != t.param_count())
    fail(ErrorKind::invalid_argument,
         "parameter vector has length " + std::to_string(w.size()) + ", topology " +
             t.describe() + " expects " + std::to_string(t.param_count()));
}

// out = in * W + b for one weight layer.
void affine(const Matrix& in, std::span<const double> w, std::span<const double> b, Matrix& out) {
  const std::size_t n_in = in.cols, n_out = b.size();
  out = Matrix(in.rows, n_out);
  for (std::size_t r = 0; r < in.rows; ++r) {
    double* o = out.data.data() + r * n_out;
    std::copy(b.begin(), b.end(), o);
    const double* a = in.data.data() + r * n_in;
    for (std::size_t i = 0; i < n_in; ++i) {
      const double ai = a[i];
      if (ai == 0.0) continue;
      const double* wi = w.data() + i * n_out;
      for (std::size_t j = 0; j < n_out; ++j) o[j] += ai * wi[j];
    }
  }
}

}  // namespace

ForwardTrace forward(const Topology& topology, std::span<const double> w, const Matrix& x) {
  topology.validate();
  check_weights(topology, w);
  if (x.cols != topology.inputs())
    fail(ErrorKind::invalid_argument,
         "input has shape [" + std::to_string(x.rows) + " x " + std::to_string(x.cols) +
             "], expected [n x " + std::to_string(topology.inputs()) + "]");

  ForwardTrace tr;
  tr.topology = topology;
  tr.weights_fingerprint = fingerprint(w);
  const std::size_t layers = topology.weight_layers();
  tr.activations.reserve(layers + 1);
  tr.pre_activations.reserve(layers);
  tr.activations.push_back(x);
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t n_in = topology.layer_sizes[l], n_out = topology.layer_sizes[l + 1];
    auto wl = w.subspan(topology.weight_offset(l), n_in * n_out);
    auto bl = w.subspan(topology.bias_offset(l), n_out);
    Matrix z;
    affine(tr.activations.back(), wl, bl, z);
    Matrix a = z;
    if (l + 1 < layers)
      for (double& v : a.data) v = activate(topology.hidden, v);
    tr.pre_activations.push_back(std::move(z));
    tr.activations.push_back(std::move(a));
  }
  return tr;
}

Matrix forward_outputs(const Topology& topology, std::span<const double> w, const Matrix& x) {
  return forward(topology, w, x).output();
}

namespace {

void check_targets(const Matrix& outputs, std::span<const double> targets) {
  if (targets.size() != outputs.rows)
    fail(ErrorKind::invalid_argument, "targets have length " + std::to_string(targets.size()) +
                                          ", outputs have " + std::to_string(outputs.rows) +
                                          " rows");
}

std::size_t class_index(double t, std::size_t classes) {
  if (!(t >= 0.0) || t != std::floor(t) || t >= static_cast<double>(classes))
    fail(ErrorKind::invalid_argument, "class target out of range: " + std::to_string(t));
  return static_cast<std::size_t>(t);
}

double log_sum_exp(std::span<const double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

}  // namespace

double nll(OutputHead head, const Matrix& outputs, std::span<const double> targets,
           double noise_variance) {
  check_targets(outputs, targets);
  if (head == OutputHead::identity) {
    if (!(noise_variance > 0.0))
      fail(ErrorKind::invalid_argument, "noise variance must be positive");
    const double log_norm = 0.5 * std::log(2.0 * std::numbers::pi * noise_variance);
    double total = 0.0;
    for (std::size_t r = 0; r < outputs.rows; ++r)
      for (std::size_t c = 0; c < outputs.cols; ++c) {
        const double e = outputs(r, c) - targets[r];
        total += log_norm + e * e / (2.0 * noise_variance);
      }
    return total;
  }
  double total = 0.0;
  for (std::size_t r = 0; r < outputs.rows; ++r) {
    const auto row = outputs.row(r);
    total += log_sum_exp(row) - row[class_index(targets[r], outputs.cols)];
  }
  return total;
}

Matrix nll_output_gradient(OutputHead head, const Matrix& outputs,
                           std::span<const double> targets, double noise_variance) {
  check_targets(outputs, targets);
  Matrix g(outputs.rows, outputs.cols);
  if (head == OutputHead::identity) {
    if (!(noise_variance > 0.0))
      fail(ErrorKind::invalid_argument, "noise variance must be positive");
    for (std::size_t r = 0; r < outputs.rows; ++r)
      for (std::size_t c = 0; c < outputs.cols; ++c)
        g(r, c) = (outputs(r, c) - targets[r]) / noise_variance;
    return g;
  }
  for (std::size_t r = 0; r < outputs.rows; ++r) {
    const auto row = outputs.row(r);
    const double lse = log_sum_exp(row);
    for (std::size_t c = 0; c < outputs.cols; ++c) g(r, c) = std::exp(row[c] - lse);
    g(r, class_index(targets[r], outputs.cols)) -= 1.0;
  }
  return g;
}

ParameterVector backward(const ForwardTrace& trace, std::span<const double> w,
                         const Matrix& output_gradient) {
  const Topology& t = trace.topology;
  check_weights(t, w);
  if (trace.activations.size() != t.weight_layers() + 1 ||
      trace.weights_fingerprint != fingerprint(w))
    fail(ErrorKind::invalid_argument,
         "forward trace does not belong to this parameter vector (stale trace)");
  const Matrix& out = trace.output();
  if (output_gradient.rows != out.rows || output_gradient.cols != out.cols)
    fail(ErrorKind::invalid_argument, "loss gradient shape does not match the traced outputs");

  ParameterVector grad(w.size(), 0.0);
  Matrix delta = output_gradient;  // dL/dz for the current layer
  for (std::size_t l = t.weight_layers(); l-- > 0;) {
    const std::size_t n_in = t.layer_sizes[l], n_out = t.layer_sizes[l + 1];
    const Matrix& a_in = trace.activations[l];
    double* gw = grad.data() + t.weight_offset(l);
    double* gb = grad.data() + t.bias_offset(l);
    const double* wl = w.data() + t.weight_offset(l);
    for (std::size_t r = 0; r < delta.rows; ++r) {
      const double* d = delta.data.data() + r * n_out;
      const double* a = a_in.data.data() + r * n_in;
      for (std::size_t j = 0; j < n_out; ++j) gb[j] += d[j];
      for (std::size_t i = 0; i < n_in; ++i) {
        const double ai = a[i];
        if (ai == 0.0) continue;
        double* gwi = gw + i * n_out;
        for (std::size_t j = 0; j < n_out; ++j) gwi[j] += ai * d[j];
      }
    }
    if (l == 0) break;
    const Matrix& z_in = trace.pre_activations[l - 1];
    Matrix prev(delta.rows, n_in);
    for (std::size_t r = 0; r < delta.rows; ++r) {
      const double* d = delta.data.data() + r * n_out;
      for (std::size_t i = 0; i < n_in; ++i) {
        const double deriv = activate_derivative(t.hidden, z_in(r, i));
        if (deriv == 0.0) continue;
        const double* wi = wl + i * n_out;
        double s = 0.0;
        for (std::size_t j = 0; j < n_out; ++j) s += wi[j] * d[j];
        prev(r, i) = s * deriv;
      }
    }
    delta = std::move(prev);
  }
  return grad;
}

}  // namespace sbnn
