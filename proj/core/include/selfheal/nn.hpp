#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "selfheal/rng.hpp"

namespace selfheal {

enum class Activation { Relu, Tanh, Sigmoid, Identity };

const char* activation_name(Activation a);
Activation parse_activation(const std::string& name);

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
  Activation activation = Activation::Identity;
};

struct MlpShape {
  Eigen::Index input = 0;
  std::vector<Eigen::Index> hidden;
  Eigen::Index output = 0;
  Activation hidden_activation = Activation::Relu;
  Activation output_activation = Activation::Identity;
  /// When set, construction insists on 1-2 hidden layers of 32-64 units.
  bool enforce_compact = true;
};

/// Feed-forward network as a plain value: copyable, no hidden state.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<DenseLayer> layers);

  /// Glorot-uniform weights, zero biases.
  static Mlp create(const MlpShape& shape, Rng& rng);

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  Eigen::Index input_dim() const;
  Eigen::Index output_dim() const;
  std::size_t parameter_count() const;

  Eigen::VectorXd forward(const Eigen::VectorXd& input) const;
  /// Columns are samples.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs) const;

  friend bool operator==(const Mlp& a, const Mlp& b);

 private:
  std::vector<DenseLayer> layers_;
};

struct MlpGradients {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;
  Eigen::MatrixXd input;  // same shape as the inputs passed to backward

  static MlpGradients zeros_like(const Mlp& net);
};

Eigen::VectorXd mlp_forward(const Mlp& net, const Eigen::VectorXd& input);

/// Reverse-mode gradients of sum(output .* upstream) for a batch of column
/// samples. Parameter gradients are summed over the batch.
MlpGradients mlp_backward(const Mlp& net, const Eigen::MatrixXd& inputs,
                          const Eigen::MatrixXd& upstream);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<Eigen::MatrixXd> m_weight, v_weight;
  std::vector<Eigen::VectorXd> m_bias, v_bias;
  std::int64_t step = 0;

  AdamState() = default;
  AdamState(const Mlp& net, AdamConfig config);
};

/// One bias-corrected Adam step. Throws NumericError naming the layer when a
/// gradient is not finite; the network is left untouched in that case.
void adam_update(Mlp& net, const MlpGradients& grads, AdamState& state);

/// target <- tau * source + (1 - tau) * target
void soft_update(Mlp& target, const Mlp& source, double tau);

using BackwardFn =
    std::function<MlpGradients(const Mlp&, const Eigen::MatrixXd&, const Eigen::MatrixXd&)>;

/// Compares analytic gradients of sum(output) against central differences.
/// Returns max |a - n| / max(1e-8, |a| + |n|) over every weight and bias.
double gradient_check(const Mlp& net, const Eigen::VectorXd& input, double step = 1e-5,
                      const BackwardFn& backward = mlp_backward);

/// Text format: a header line "mlp <input> <activation>:<out> ..." followed
/// by one line per tensor (weights row-major, then biases) for each layer,
/// printed with round-trip precision. Lines starting with '#' are comments.
void save_mlp(std::ostream& out, const Mlp& net);
Mlp load_mlp(std::istream& in);

}  // namespace selfheal
