#pragma once

// Dense feed-forward network evaluated at a concrete weight realization.
//
// Canonical flat parameter order (format id 1), used by checkpoints and masks:
// for each weight layer l = 1..L+1 in turn, the weight matrix of shape
// [n_{l-1} x n_l] stored row-major (index i * n_l + j connects input unit i
// to output unit j), immediately followed by the n_l biases.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sbnn/matrix.hpp"

namespace sbnn {

enum class Activation { relu, tanh, identity };
enum class OutputHead { identity, softmax };

inline constexpr std::uint32_t kCanonicalOrderId = 1;

struct Topology {
  // n_0 (inputs), hidden sizes..., n_{L+1} (outputs)
  std::vector<std::size_t> layer_sizes;
  Activation hidden = Activation::relu;
  OutputHead head = OutputHead::identity;

  std::size_t inputs() const { return layer_sizes.front(); }
  std::size_t outputs() const { return layer_sizes.back(); }
  // Number of weight layers (L + 1).
  std::size_t weight_layers() const { return layer_sizes.size() - 1; }
  std::size_t param_count() const;
  std::size_t weight_offset(std::size_t layer) const;  // layer in [0, weight_layers())
  std::size_t bias_offset(std::size_t layer) const;
  // True for entries that are biases rather than inter-layer weights.
  std::vector<bool> bias_flags() const;

  // Throws if there is no hidden layer or any size is zero.
  void validate() const;
  std::string describe() const;

  bool operator==(const Topology&) const = default;
};

Topology make_topology(std::size_t inputs, std::vector<std::size_t> hidden, std::size_t outputs,
                       Activation act = Activation::relu,
                       OutputHead head = OutputHead::identity);

using ParameterVector = std::vector<double>;

// Cached per-layer values of one forward pass; consumed by backward().
struct ForwardTrace {
  Topology topology;
  std::uint64_t weights_fingerprint = 0;
  // activations[0] is the input batch; activations[l] the output of layer l.
  // pre_activations[l - 1] is the affine value feeding activations[l].
  std::vector<Matrix> activations;
  std::vector<Matrix> pre_activations;

  const Matrix& output() const { return activations.back(); }
};

std::uint64_t fingerprint(std::span<const double> w);

double activate(Activation act, double z);
double activate_derivative(Activation act, double z);

// Outputs are the final affine values: regression predictions for the
// identity head, logits for the softmax head.
ForwardTrace forward(const Topology& topology, std::span<const double> w, const Matrix& x);
Matrix forward_outputs(const Topology& topology, std::span<const double> w, const Matrix& x);

// Negative log-likelihood summed over rows. For the softmax head `targets`
// holds class indices.
double nll(OutputHead head, const Matrix& outputs, std::span<const double> targets,
           double noise_variance);
// Gradient of nll() with respect to the outputs.
Matrix nll_output_gradient(OutputHead head, const Matrix& outputs,
                           std::span<const double> targets, double noise_variance);

// Reverse-mode gradient of a scalar loss with respect to every parameter,
// given the loss gradient at the outputs.
ParameterVector backward(const ForwardTrace& trace, std::span<const double> w,
                         const Matrix& output_gradient);

}  // namespace sbnn
