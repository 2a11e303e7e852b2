#include "selfheal/nn.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "selfheal/config.hpp"
#include "selfheal/errors.hpp"

namespace selfheal {
namespace {

Eigen::MatrixXd activate(const Eigen::MatrixXd& z, Activation a) {
  switch (a) {
    case Activation::Relu: return z.cwiseMax(0.0);
    case Activation::Tanh: return z.array().tanh().matrix();
    case Activation::Sigmoid: return (1.0 / (1.0 + (-z.array()).exp())).matrix();
    case Activation::Identity: return z;
  }
  return z;
}

// Derivative expressed through the pre-activation z and output y.
Eigen::MatrixXd activation_grad(const Eigen::MatrixXd& z, const Eigen::MatrixXd& y, Activation a) {
  switch (a) {
    case Activation::Relu: return (z.array() > 0.0).cast<double>().matrix();
    case Activation::Tanh: return (1.0 - y.array().square()).matrix();
    case Activation::Sigmoid: return (y.array() * (1.0 - y.array())).matrix();
    case Activation::Identity: return Eigen::MatrixXd::Ones(z.rows(), z.cols());
  }
  return Eigen::MatrixXd::Ones(z.rows(), z.cols());
}

void check_finite(const Eigen::MatrixXd& m, std::size_t layer, const char* what) {
  if (!m.allFinite()) {
    throw NumericError("non-finite " + std::string(what) + " gradient in layer " +
                       std::to_string(layer));
  }
}

}  // namespace

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Identity: return "identity";
  }
  return "?";
}

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "identity") return Activation::Identity;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.bias.size() != l.weight.rows()) {
      throw std::invalid_argument("layer " + std::to_string(i) + ": bias size does not match rows");
    }
    if (i > 0 && l.weight.cols() != layers_[i - 1].weight.rows()) {
      throw std::invalid_argument("layer " + std::to_string(i) +
                                  ": input width does not chain with previous layer");
    }
  }
}

Mlp Mlp::create(const MlpShape& shape, Rng& rng) {
  if (shape.input < 1 || shape.output < 1) throw std::invalid_argument("MLP dimensions must be >= 1");
  if (shape.enforce_compact) {
    if (shape.hidden.empty() || shape.hidden.size() > 2) {
      throw std::invalid_argument("compact MLP needs 1-2 hidden layers");
    }
    for (auto h : shape.hidden) {
      if (h < 32 || h > 64) throw std::invalid_argument("compact MLP hidden width must be 32-64");
    }
  }
  std::vector<Eigen::Index> widths{shape.input};
  widths.insert(widths.end(), shape.hidden.begin(), shape.hidden.end());
  widths.push_back(shape.output);

  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    const auto in = widths[i];
    const auto out = widths[i + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    DenseLayer l;
    l.weight.resize(out, in);
    for (Eigen::Index r = 0; r < out; ++r) {
      for (Eigen::Index c = 0; c < in; ++c) l.weight(r, c) = uniform(rng, -limit, limit);
    }
    l.bias = Eigen::VectorXd::Zero(out);
    l.activation = (i + 2 == widths.size()) ? shape.output_activation : shape.hidden_activation;
    layers.push_back(std::move(l));
  }
  return Mlp(std::move(layers));
}

Eigen::Index Mlp::input_dim() const { return layers_.empty() ? 0 : layers_.front().weight.cols(); }
Eigen::Index Mlp::output_dim() const { return layers_.empty() ? 0 : layers_.back().weight.rows(); }

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& input) const {
  return forward_batch(input);
}

Eigen::MatrixXd Mlp::forward_batch(const Eigen::MatrixXd& inputs) const {
  if (inputs.rows() != input_dim()) {
    throw std::invalid_argument("MLP input has " + std::to_string(inputs.rows()) +
                                " rows, expected " + std::to_string(input_dim()));
  }
  Eigen::MatrixXd a = inputs;
  for (const auto& l : layers_) {
    Eigen::MatrixXd z = l.weight * a;
    z.colwise() += l.bias;
    a = activate(z, l.activation);
  }
  return a;
}

bool operator==(const Mlp& a, const Mlp& b) {
  if (a.layers_.size() != b.layers_.size()) return false;
  for (std::size_t i = 0; i < a.layers_.size(); ++i) {
    const auto& x = a.layers_[i];
    const auto& y = b.layers_[i];
    if (x.activation != y.activation || x.weight.rows() != y.weight.rows() ||
        x.weight.cols() != y.weight.cols() || x.weight != y.weight || x.bias != y.bias) {
      return false;
    }
  }
  return true;
}

MlpGradients MlpGradients::zeros_like(const Mlp& net) {
  MlpGradients g;
  for (const auto& l : net.layers()) {
    g.weight.push_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
    g.bias.push_back(Eigen::VectorXd::Zero(l.bias.size()));
  }
  return g;
}

Eigen::VectorXd mlp_forward(const Mlp& net, const Eigen::VectorXd& input) { return net.forward(input); }

MlpGradients mlp_backward(const Mlp& net, const Eigen::MatrixXd& inputs,
                          const Eigen::MatrixXd& upstream) {
  const auto& layers = net.layers();
  if (inputs.rows() != net.input_dim()) {
    throw std::invalid_argument("backward: input has " + std::to_string(inputs.rows()) +
                                " rows, expected " + std::to_string(net.input_dim()));
  }
  if (upstream.rows() != net.output_dim() || upstream.cols() != inputs.cols()) {
    throw std::invalid_argument("backward: upstream gradient shape does not match output");
  }

  std::vector<Eigen::MatrixXd> pre(layers.size());
  std::vector<Eigen::MatrixXd> post(layers.size() + 1);
  post[0] = inputs;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    pre[i] = layers[i].weight * post[i];
    pre[i].colwise() += layers[i].bias;
    post[i + 1] = activate(pre[i], layers[i].activation);
  }

  MlpGradients g;
  g.weight.resize(layers.size());
  g.bias.resize(layers.size());
  Eigen::MatrixXd delta = upstream;
  for (std::size_t k = layers.size(); k-- > 0;) {
    delta = delta.cwiseProduct(activation_grad(pre[k], post[k + 1], layers[k].activation));
    g.weight[k] = delta * post[k].transpose();
    g.bias[k] = delta.rowwise().sum();
    delta = layers[k].weight.transpose() * delta;
  }
  g.input = std::move(delta);
  return g;
}

AdamState::AdamState(const Mlp& net, AdamConfig cfg) : config(cfg) {
  for (const auto& l : net.layers()) {
    m_weight.push_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
    v_weight.push_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
    m_bias.push_back(Eigen::VectorXd::Zero(l.bias.size()));
    v_bias.push_back(Eigen::VectorXd::Zero(l.bias.size()));
  }
}

void adam_update(Mlp& net, const MlpGradients& grads, AdamState& state) {
  auto& layers = net.layers();
  if (grads.weight.size() != layers.size() || grads.bias.size() != layers.size() ||
      state.m_weight.size() != layers.size()) {
    throw std::invalid_argument("adam_update: gradient/state layer count does not match network");
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (grads.weight[i].rows() != layers[i].weight.rows() ||
        grads.weight[i].cols() != layers[i].weight.cols() ||
        grads.bias[i].size() != layers[i].bias.size()) {
      throw std::invalid_argument("adam_update: gradient shape mismatch in layer " + std::to_string(i));
    }
    check_finite(grads.weight[i], i, "weight");
    check_finite(grads.bias[i], i, "bias");
  }

  const auto& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correct1 = 1.0 - std::pow(c.beta1, t);
  const double correct2 = 1.0 - std::pow(c.beta2, t);

  auto apply = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    param.array() -= c.lr * (m.array() / correct1) / ((v.array() / correct2).sqrt() + c.eps);
  };
  for (std::size_t i = 0; i < layers.size(); ++i) {
    apply(layers[i].weight, state.m_weight[i], state.v_weight[i], grads.weight[i]);
    apply(layers[i].bias, state.m_bias[i], state.v_bias[i], grads.bias[i]);
  }
}

void soft_update(Mlp& target, const Mlp& source, double tau) {
  auto& t = target.layers();
  const auto& s = source.layers();
  if (t.size() != s.size()) throw std::invalid_argument("soft_update: layer count mismatch");
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i].weight = tau * s[i].weight + (1.0 - tau) * t[i].weight;
    t[i].bias = tau * s[i].bias + (1.0 - tau) * t[i].bias;
  }
}

double gradient_check(const Mlp& net, const Eigen::VectorXd& input, double step,
                      const BackwardFn& backward) {
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(net.output_dim(), 1);
  const MlpGradients analytic = backward(net, input, ones);

  Mlp probe = net;
  auto objective = [&]() { return probe.forward(input).sum(); };
  double worst = 0.0;
  auto compare = [&](double& param, double grad) {
    const double saved = param;
    param = saved + step;
    const double up = objective();
    param = saved - step;
    const double down = objective();
    param = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double err = std::abs(grad - numeric) / std::max(1e-8, std::abs(grad) + std::abs(numeric));
    worst = std::max(worst, err);
  };

  for (std::size_t k = 0; k < probe.layers().size(); ++k) {
    auto& layer = probe.layers()[k];
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        compare(layer.weight(r, c), analytic.weight[k](r, c));
      }
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) compare(layer.bias(r), analytic.bias[k](r));
  }
  return worst;
}

void save_mlp(std::ostream& out, const Mlp& net) {
  out << "mlp " << net.input_dim();
  for (const auto& l : net.layers()) out << ' ' << activation_name(l.activation) << ':' << l.weight.rows();
  out << '\n';
  for (const auto& l : net.layers()) {
    // Row-major so the file reads like the matrix.
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) {
        if (r > 0 || c > 0) out << ' ';
        out << format_exact(l.weight(r, c));
      }
    }
    out << '\n';
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) {
      if (r > 0) out << ' ';
      out << format_exact(l.bias(r));
    }
    out << '\n';
  }
}

Mlp load_mlp(std::istream& in) {
  auto next_line = [&](std::string& line) {
    while (std::getline(in, line)) {
      if (!line.empty() && line[0] != '#') return true;
    }
    return false;
  };
  std::string line;
  if (!next_line(line)) throw std::invalid_argument("network file is empty");
  std::istringstream header(line);
  std::string tag;
  Eigen::Index input = 0;
  header >> tag >> input;
  if (tag != "mlp" || input < 1) throw std::invalid_argument("network file: bad header '" + line + "'");

  std::vector<std::pair<Activation, Eigen::Index>> specs;
  std::string spec;
  while (header >> spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("network file: bad layer '" + spec + "'");
    specs.emplace_back(parse_activation(spec.substr(0, colon)), std::stol(spec.substr(colon + 1)));
  }

  auto read_values = [&](Eigen::Index count) {
    std::string l;
    if (!next_line(l)) throw std::invalid_argument("network file truncated");
    std::istringstream ls(l);
    std::vector<double> values;
    std::string tok;
    while (ls >> tok) values.push_back(std::stod(tok));
    if (static_cast<Eigen::Index>(values.size()) != count) {
      throw std::invalid_argument("network file: expected " + std::to_string(count) + " values, got " +
                                  std::to_string(values.size()));
    }
    return values;
  };

  std::vector<DenseLayer> layers;
  Eigen::Index prev = input;
  for (const auto& [act, out] : specs) {
    DenseLayer l;
    l.activation = act;
    l.weight.resize(out, prev);
    const auto w = read_values(out * prev);
    for (Eigen::Index r = 0; r < out; ++r) {
      for (Eigen::Index c = 0; c < prev; ++c) l.weight(r, c) = w[static_cast<std::size_t>(r * prev + c)];
    }
    const auto b = read_values(out);
    l.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), out);
    layers.push_back(std::move(l));
    prev = out;
  }
  return Mlp(std::move(layers));
}

}  // namespace selfheal
