#pragma once

// Binary checkpoint, little-endian, format version 1:
//
//   offset  size      field
//   0       8         magic "SBNNCKPT"
//   8       4  u32    format version (1)
//   12      4  u32    canonical parameter order id (1, see network.hpp)
//   16      4  u32    hidden activation (0 relu, 1 tanh, 2 identity)
//   20      4  u32    output head (0 identity, 1 softmax)
//   24      4  u32    number of layer sizes K
//   28      8K u64    layer sizes n_0 .. n_{L+1}
//   ..      8  f64    prior pi
//   ..      8  f64    prior tau1
//   ..      8  f64    prior tau0
//   ..      8  f64    noise variance
//   ..      8  u64    parameter count M
//   ..      8M f64    m
//   ..      8M f64    rho
//   ..      8M f64    p
//   ..      1  u8     mask flag (0 none, 1 present)
//   ..      M  u8     keep mask (only when flag = 1)

#include <string>

#include "sbnn/variational.hpp"

namespace sbnn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  Model model;
  VariationalParams params;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::string& bytes);

}  // namespace sbnn
