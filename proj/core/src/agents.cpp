#include "selfheal/agents.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "selfheal/baselines.hpp"
#include "selfheal/config.hpp"
#include "selfheal/errors.hpp"

namespace selfheal {

double linear_schedule(double start, double end, double progress) {
  const double p = std::clamp(progress, 0.0, 1.0);
  return start + (end - start) * p;
}

std::size_t epsilon_greedy(std::span<const double> values, double epsilon, Rng& rng) {
  if (values.empty()) throw std::invalid_argument("epsilon_greedy: no action values");
  if (epsilon > 0.0 && uniform(rng, 0.0, 1.0) < epsilon) return uniform_index(rng, values.size());
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

Eigen::VectorXd encode_observation(const std::array<double, kObsDim>& obs) {
  Eigen::VectorXd x(kObsDim);
  x << (obs[0] - 0.9) * 10.0, 2.0 * obs[1] - 1.0, obs[2] * 10.0;
  return x;
}

Eigen::MatrixXd encode_observations(std::span<const std::array<double, kObsDim>> batch) {
  Eigen::MatrixXd x(kObsDim, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) x.col(static_cast<Eigen::Index>(i)) = encode_observation(batch[i]);
  return x;
}

namespace {

MlpShape network_shape(Eigen::Index in, Eigen::Index out, std::int64_t hidden, std::int64_t layers,
                       Activation output) {
  MlpShape shape;
  shape.input = in;
  shape.output = out;
  shape.hidden.assign(static_cast<std::size_t>(layers), static_cast<Eigen::Index>(hidden));
  shape.output_activation = output;
  return shape;
}

void check_network(std::int64_t hidden, std::int64_t layers, const char* who) {
  if (layers < 1 || layers > 2 || hidden < 32 || hidden > 64) {
    throw ConfigError(std::string(who) + ": networks use 1-2 hidden layers of 32-64 units");
  }
}

void check_unit(double v, const char* key) {
  if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(key) + " must lie in [0, 1]");
}

void check_positive(std::int64_t v, const char* key) {
  if (v <= 0) throw ConfigError(std::string(key) + " must be positive");
}

}  // namespace

// ---------------------------------------------------------------------------
// Tabular Q-learning

void QLearningConfig::validate() const {
  check_positive(bins, "qlearning.bins");
  check_positive(episodes, "qlearning.episodes");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("qlearning.alpha must lie in (0, 1]");
  check_unit(gamma, "qlearning.gamma");
  check_unit(epsilon_start, "qlearning.epsilon_start");
  check_unit(epsilon_end, "qlearning.epsilon_end");
  check_unit(epsilon_decay_fraction, "qlearning.epsilon_decay_fraction");
}

double QLearningConfig::epsilon(std::int64_t episode) const {
  const double span = epsilon_decay_fraction * static_cast<double>(episodes);
  if (span <= 0.0) return epsilon_end;
  return linear_schedule(epsilon_start, epsilon_end, static_cast<double>(episode) / span);
}

void bind_config(ConfigRegistry& r, QLearningConfig& c, const std::string& p) {
  r.bind(p + ".bins", c.bins, "integrity bins");
  r.bind(p + ".alpha", c.alpha, "learning rate");
  r.bind(p + ".gamma", c.gamma, "discount");
  r.bind(p + ".epsilon_start", c.epsilon_start, "initial exploration rate");
  r.bind(p + ".epsilon_end", c.epsilon_end, "final exploration rate");
  r.bind(p + ".epsilon_decay_fraction", c.epsilon_decay_fraction, "share of episodes spent decaying epsilon");
  r.bind(p + ".episodes", c.episodes, "training episodes");
}

QTable::QTable(QLearningConfig config) : config_(config) {
  config_.validate();
  bins_ = static_cast<std::size_t>(config_.bins);
  table_.assign(bins_ * kNumInterventions, 0.0);
}

void QTable::check(std::size_t s, std::size_t a) const {
  if (s >= bins_ || a >= kNumInterventions) {
    throw std::out_of_range("QTable: state " + std::to_string(s) + " action " + std::to_string(a));
  }
}

double QTable::value(std::size_t s, std::size_t a) const {
  check(s, a);
  return table_[s * kNumInterventions + a];
}

void QTable::set_value(std::size_t s, std::size_t a, double v) {
  check(s, a);
  table_[s * kNumInterventions + a] = v;
}

std::span<const double> QTable::values(std::size_t s) const {
  check(s, 0);
  return {table_.data() + s * kNumInterventions, kNumInterventions};
}

std::size_t QTable::greedy(std::size_t s) const {
  const auto v = values(s);
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

double QTable::q_update(std::size_t s, std::size_t a, double reward, std::size_t s_next, bool terminal) {
  check(s, a);
  check(s_next, 0);
  double bootstrap = 0.0;
  if (!terminal) {
    const auto next = values(s_next);
    bootstrap = *std::max_element(next.begin(), next.end());
  }
  double& q = table_[s * kNumInterventions + a];
  const double delta = reward + config_.gamma * bootstrap - q;
  q += config_.alpha * delta;
  return delta;
}

void QTable::save_csv(std::ostream& out, const std::string& provenance) const {
  if (!provenance.empty()) out << "# " << provenance << '\n';
  out << "bin,action,value\n";
  for (std::size_t s = 0; s < bins_; ++s) {
    for (std::size_t a = 0; a < kNumInterventions; ++a) {
      out << s << ',' << intervention_name(static_cast<Intervention>(a)) << ','
          << format_exact(table_[s * kNumInterventions + a]) << '\n';
    }
  }
}

QTable QTable::load_csv(std::istream& in, QLearningConfig config) {
  std::vector<std::tuple<std::size_t, std::size_t, double>> rows;
  std::string line;
  bool header = false;
  std::size_t max_bin = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "bin,action,value") throw IoError("q-table: unexpected header '" + line + "'");
      header = true;
      continue;
    }
    std::stringstream ss(line);
    std::string bin, action, value;
    if (!std::getline(ss, bin, ',') || !std::getline(ss, action, ',') || !std::getline(ss, value)) {
      throw IoError("q-table: malformed row '" + line + "'");
    }
    std::size_t a = kNumInterventions;
    for (std::size_t k = 0; k < kNumInterventions; ++k) {
      if (action == intervention_name(static_cast<Intervention>(k))) a = k;
    }
    if (a == kNumInterventions) throw IoError("q-table: unknown action '" + action + "'");
    try {
      const auto s = static_cast<std::size_t>(std::stoull(bin));
      rows.emplace_back(s, a, std::stod(value));
      max_bin = std::max(max_bin, s);
    } catch (const std::logic_error&) {
      throw IoError("q-table: malformed row '" + line + "'");
    }
  }
  if (!header || rows.empty()) throw IoError("q-table: no rows");
  config.bins = static_cast<std::int64_t>(max_bin + 1);
  QTable table(config);
  for (const auto& [s, a, v] : rows) table.set_value(s, a, v);
  return table;
}

QTable train_qlearning(const QLearningConfig& config, const ScalarEnvConfig& env_config,
                       const StochasticHealParams& heal, std::uint64_t seed) {
  QTable table(config);
  ScalarEnv env(env_config, ActionSpace::Discrete, heal);
  Rng explore = make_rng(seed, Stream::Exploration);
  for (std::int64_t ep = 0; ep < config.episodes; ++ep) {
    Observation obs = env.reset(derive_seed(seed, Stream::Training, static_cast<std::uint64_t>(ep)));
    const double eps = config.epsilon(ep);
    while (!env.done()) {
      const std::size_t s = table.state_of(obs);
      const std::size_t a = epsilon_greedy(table.values(s), eps, explore);
      const StepOutcome out = env.step(Action::discrete(static_cast<Intervention>(a)));
      table.q_update(s, a, out.reward, table.state_of(out.observation), out.terminal);
      obs = out.observation;
    }
  }
  return table;
}

Action QTableController::act(const Observation& obs) {
  return Action::discrete(static_cast<Intervention>(table_.greedy(table_.state_of(obs))));
}

// ---------------------------------------------------------------------------
// DQN

const char* dqn_variant_name(DqnVariant v) {
  switch (v) {
    case DqnVariant::Uniform: return "uniform";
    case DqnVariant::Prioritized: return "per";
    case DqnVariant::Transfer: return "transfer";
  }
  return "?";
}

void DqnConfig::validate() const {
  check_network(hidden, hidden_layers, "dqn");
  check_unit(gamma, "dqn.gamma");
  if (!(lr > 0.0)) throw ConfigError("dqn.lr must be positive");
  check_positive(batch, "dqn.batch");
  check_positive(sync_period, "dqn.sync_period");
  check_positive(episodes, "dqn.episodes");
  check_unit(epsilon_start, "dqn.epsilon_start");
  check_unit(epsilon_end, "dqn.epsilon_end");
  check_unit(epsilon_decay_fraction, "dqn.epsilon_decay_fraction");
  if (learning_starts < batch) throw ConfigError("dqn.learning_starts must be >= dqn.batch");
  if (prefill < 0) throw ConfigError("dqn.prefill must be >= 0");
  replay.validate();
  if (batch > replay.capacity) throw ConfigError("dqn.batch exceeds the replay capacity");
}

void bind_config(ConfigRegistry& r, DqnConfig& c, const std::string& p) {
  r.bind(p + ".hidden", c.hidden, "units per hidden layer");
  r.bind(p + ".hidden_layers", c.hidden_layers, "hidden layers");
  r.bind(p + ".gamma", c.gamma, "discount");
  r.bind(p + ".lr", c.lr, "Adam learning rate");
  r.bind(p + ".batch", c.batch, "minibatch size");
  r.bind(p + ".sync_period", c.sync_period, "train steps between hard target syncs");
  r.bind(p + ".epsilon_start", c.epsilon_start, "initial exploration rate");
  r.bind(p + ".epsilon_end", c.epsilon_end, "final exploration rate");
  r.bind(p + ".epsilon_decay_fraction", c.epsilon_decay_fraction, "share of steps spent decaying epsilon");
  r.bind(p + ".episodes", c.episodes, "training episodes");
  r.bind(p + ".learning_starts", c.learning_starts, "stored transitions before updates begin");
  r.bind(p + ".prefill", c.prefill, "heuristic transitions preloaded by the transfer variant");
  bind_config(r, c.replay, p + ".replay");
}

DqnAgent::DqnAgent(DqnConfig config, DqnVariant variant, std::uint64_t seed)
    : config_((config.validate(), config)),
      variant_(variant),
      buffer_(config_.replay,
              variant == DqnVariant::Prioritized ? ReplayMode::Prioritized : ReplayMode::Uniform),
      sample_rng_(make_rng(seed, Stream::Sampling)),
      explore_rng_(make_rng(seed, Stream::Exploration)) {
  Rng init = make_rng(seed, Stream::Init);
  online_ = Mlp::create(network_shape(kObsDim, kNumInterventions, config_.hidden, config_.hidden_layers,
                                      Activation::Identity),
                        init);
  target_ = online_;
  adam_ = AdamState(online_, AdamConfig{config_.lr});
}

void DqnAgent::set_networks(Mlp online, Mlp target) {
  if (online.input_dim() != static_cast<Eigen::Index>(kObsDim) ||
      online.output_dim() != static_cast<Eigen::Index>(kNumInterventions) ||
      target.input_dim() != online.input_dim() || target.output_dim() != online.output_dim()) {
    throw std::invalid_argument("DqnAgent::set_networks: networks must map 3 inputs to 3 outputs");
  }
  online_ = std::move(online);
  target_ = std::move(target);
  adam_ = AdamState(online_, AdamConfig{config_.lr});
}

std::array<double, kNumInterventions> DqnAgent::q_values(const Observation& obs) const {
  const Eigen::VectorXd q = online_.forward(encode_observation(obs.to_array()));
  return {q(0), q(1), q(2)};
}

Intervention DqnAgent::greedy_action(const Observation& obs) const {
  const auto q = q_values(obs);
  return static_cast<Intervention>(std::max_element(q.begin(), q.end()) - q.begin());
}

Intervention DqnAgent::act(const Observation& obs, double epsilon) {
  const auto q = q_values(obs);
  return static_cast<Intervention>(epsilon_greedy(q, epsilon, explore_rng_));
}

bool DqnAgent::ready() const {
  return buffer_.size() >= static_cast<std::size_t>(config_.batch);
}

double DqnAgent::train_step() {
  if (!ready()) throw StateError("dqn: replay holds fewer transitions than one batch");
  const auto batch = buffer_.sample(static_cast<std::size_t>(config_.batch), sample_rng_);
  const auto n = static_cast<Eigen::Index>(batch.size());
  Eigen::MatrixXd s(kObsDim, n), s2(kObsDim, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s.col(i) = encode_observation(batch[static_cast<std::size_t>(i)].transition.obs);
    s2.col(i) = encode_observation(batch[static_cast<std::size_t>(i)].transition.next_obs);
  }
  const Eigen::MatrixXd q_next = target_.forward_batch(s2);
  const Eigen::MatrixXd q = online_.forward_batch(s);

  Eigen::MatrixXd upstream = Eigen::MatrixXd::Zero(q.rows(), n);
  std::vector<std::size_t> indices(batch.size());
  std::vector<double> td(batch.size());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& sample = batch[static_cast<std::size_t>(i)];
    const auto& t = sample.transition;
    const double y = t.reward + (t.terminal ? 0.0 : config_.gamma * q_next.col(i).maxCoeff());
    const auto a = static_cast<Eigen::Index>(t.action);
    const double delta = q(a, i) - y;
    loss += sample.weight * delta * delta;
    upstream(a, i) = 2.0 * sample.weight * delta / static_cast<double>(n);
    indices[static_cast<std::size_t>(i)] = sample.index;
    td[static_cast<std::size_t>(i)] = delta;
  }
  adam_update(online_, mlp_backward(online_, s, upstream), adam_);
  if (buffer_.mode() == ReplayMode::Prioritized) buffer_.update_priorities(indices, td);
  if (++train_steps_ % config_.sync_period == 0) sync_target();
  return loss / static_cast<double>(n);
}

DqnAgent train_dqn(const DqnConfig& config, DqnVariant variant, const ScalarEnvConfig& env_config,
                   const StochasticHealParams& heal, std::uint64_t seed) {
  DqnAgent agent(config, variant, seed);
  ScalarEnv env(env_config, ActionSpace::Discrete, heal);
  if (variant == DqnVariant::Transfer && config.prefill > 0) {
    HeuristicController heuristic;
    prefill_from_policy(agent.buffer(), heuristic, env, static_cast<std::size_t>(config.prefill), seed);
  }
  const double total = static_cast<double>(config.episodes * env_config.horizon);
  const double decay = std::max(1.0, config.epsilon_decay_fraction * total);
  std::int64_t step = 0;
  for (std::int64_t ep = 0; ep < config.episodes; ++ep) {
    Observation obs = env.reset(derive_seed(seed, Stream::Training, static_cast<std::uint64_t>(ep)));
    while (!env.done()) {
      const double eps = linear_schedule(config.epsilon_start, config.epsilon_end,
                                         static_cast<double>(step) / decay);
      const Intervention a = agent.act(obs, eps);
      const StepOutcome out = env.step(Action::discrete(a));
      agent.remember({obs.to_array(), static_cast<double>(a), out.reward, out.observation.to_array(),
                      out.terminal});
      agent.set_progress(static_cast<double>(step) / total);
      if (agent.buffer().size() >= static_cast<std::size_t>(config.learning_starts)) agent.train_step();
      obs = out.observation;
      ++step;
    }
  }
  return agent;
}

Action QNetworkController::act(const Observation& obs) {
  const Eigen::VectorXd q = net_.forward(encode_observation(obs.to_array()));
  Eigen::Index best = 0;
  q.maxCoeff(&best);
  return Action::discrete(static_cast<Intervention>(best));
}

// ---------------------------------------------------------------------------
// TD3

void Td3Config::validate() const {
  check_network(hidden, hidden_layers, "td3");
  check_unit(gamma, "td3.gamma");
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("td3.tau must lie in (0, 1]");
  check_positive(policy_delay, "td3.policy_delay");
  if (!(target_noise >= 0.0)) throw ConfigError("td3.target_noise must be >= 0");
  if (!(noise_clip >= 0.0)) throw ConfigError("td3.noise_clip must be >= 0");
  if (!(explore_noise >= 0.0)) throw ConfigError("td3.explore_noise must be >= 0");
  check_positive(batch, "td3.batch");
  if (warmup < 0) throw ConfigError("td3.warmup must be >= 0");
  check_positive(total_steps, "td3.total_steps");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) throw ConfigError("td3 learning rates must be positive");
  replay.validate();
  if (batch > replay.capacity) throw ConfigError("td3.batch exceeds the replay capacity");
}

void bind_config(ConfigRegistry& r, Td3Config& c, const std::string& p) {
  r.bind(p + ".hidden", c.hidden, "units per hidden layer");
  r.bind(p + ".hidden_layers", c.hidden_layers, "hidden layers");
  r.bind(p + ".gamma", c.gamma, "discount");
  r.bind(p + ".tau", c.tau, "soft target update rate");
  r.bind(p + ".policy_delay", c.policy_delay, "critic updates per actor update");
  r.bind(p + ".target_noise", c.target_noise, "target policy smoothing std");
  r.bind(p + ".noise_clip", c.noise_clip, "target policy smoothing clip");
  r.bind(p + ".explore_noise", c.explore_noise, "exploration noise std");
  r.bind(p + ".batch", c.batch, "minibatch size");
  r.bind(p + ".warmup", c.warmup, "uniform-random steps before learning");
  r.bind(p + ".total_steps", c.total_steps, "environment steps of training");
  r.bind(p + ".actor_lr", c.actor_lr, "actor Adam learning rate");
  r.bind(p + ".critic_lr", c.critic_lr, "critic Adam learning rate");
  bind_config(r, c.replay, p + ".replay");
}

Td3Agent::Td3Agent(Td3Config config, std::uint64_t seed)
    : config_((config.validate(), config)),
      buffer_(config_.replay, ReplayMode::Uniform),
      sample_rng_(make_rng(seed, Stream::Sampling)),
      noise_rng_(make_rng(seed, Stream::Exploration, 1)) {
  Rng init = make_rng(seed, Stream::Init);
  Mlp actor = Mlp::create(
      network_shape(kObsDim, 1, config_.hidden, config_.hidden_layers, Activation::Sigmoid), init);
  Mlp c1 = Mlp::create(
      network_shape(kObsDim + 1, 1, config_.hidden, config_.hidden_layers, Activation::Identity), init);
  Mlp c2 = Mlp::create(
      network_shape(kObsDim + 1, 1, config_.hidden, config_.hidden_layers, Activation::Identity), init);
  set_networks(std::move(actor), std::move(c1), std::move(c2));
}

void Td3Agent::set_networks(Mlp actor, Mlp critic1, Mlp critic2) {
  const auto in = static_cast<Eigen::Index>(kObsDim);
  if (actor.input_dim() != in || actor.output_dim() != 1 || critic1.input_dim() != in + 1 ||
      critic1.output_dim() != 1 || critic2.input_dim() != in + 1 || critic2.output_dim() != 1) {
    throw std::invalid_argument("Td3Agent::set_networks: actor 3->1 and critics 4->1 required");
  }
  actor_ = std::move(actor);
  critic1_ = std::move(critic1);
  critic2_ = std::move(critic2);
  set_target_networks(actor_, critic1_, critic2_);
  actor_adam_ = AdamState(actor_, AdamConfig{config_.actor_lr});
  critic1_adam_ = AdamState(critic1_, AdamConfig{config_.critic_lr});
  critic2_adam_ = AdamState(critic2_, AdamConfig{config_.critic_lr});
}

void Td3Agent::set_target_networks(Mlp actor, Mlp critic1, Mlp critic2) {
  actor_target_ = std::move(actor);
  critic1_target_ = std::move(critic1);
  critic2_target_ = std::move(critic2);
}

double Td3Agent::select_action(const Observation& obs, bool explore, Rng& rng) const {
  double a = actor_.forward(encode_observation(obs.to_array()))(0);
  if (explore) a += config_.explore_noise * standard_normal(rng);
  return std::clamp(a, 0.0, 1.0);
}

Eigen::VectorXd Td3Agent::compute_targets(std::span<const Transition> batch) {
  const auto n = static_cast<Eigen::Index>(batch.size());
  Eigen::MatrixXd s2(kObsDim, n);
  for (Eigen::Index i = 0; i < n; ++i) s2.col(i) = encode_observation(batch[static_cast<std::size_t>(i)].next_obs);
  const Eigen::MatrixXd a2 = actor_target_.forward_batch(s2);
  Eigen::MatrixXd sa2(kObsDim + 1, n);
  sa2.topRows(kObsDim) = s2;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double noise =
        std::clamp(config_.target_noise * standard_normal(noise_rng_), -config_.noise_clip, config_.noise_clip);
    sa2(kObsDim, i) = std::clamp(a2(0, i) + noise, 0.0, 1.0);
  }
  const Eigen::MatrixXd q1 = critic1_target_.forward_batch(sa2);
  const Eigen::MatrixXd q2 = critic2_target_.forward_batch(sa2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& t = batch[static_cast<std::size_t>(i)];
    y(i) = t.reward + (t.terminal ? 0.0 : config_.gamma * std::min(q1(0, i), q2(0, i)));
  }
  return y;
}

Td3Losses Td3Agent::train_step() {
  if (!ready()) throw StateError("td3: replay holds fewer transitions than one batch");
  const auto sampled = buffer_.sample_uniform(static_cast<std::size_t>(config_.batch), sample_rng_);
  std::vector<Transition> batch;
  batch.reserve(sampled.size());
  for (const auto& s : sampled) batch.push_back(s.transition);
  const auto n = static_cast<Eigen::Index>(batch.size());
  const double inv_n = 1.0 / static_cast<double>(n);

  const Eigen::VectorXd y = compute_targets(batch);
  Eigen::MatrixXd sa(kObsDim + 1, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    sa.col(i).head(kObsDim) = encode_observation(batch[static_cast<std::size_t>(i)].obs);
    sa(kObsDim, i) = batch[static_cast<std::size_t>(i)].action;
  }

  Td3Losses losses;
  for (auto [critic, adam] : {std::pair{&critic1_, &critic1_adam_}, std::pair{&critic2_, &critic2_adam_}}) {
    const Eigen::RowVectorXd delta = critic->forward_batch(sa).row(0) - y.transpose();
    losses.critic += delta.squaredNorm() * inv_n;
    const Eigen::MatrixXd upstream = 2.0 * inv_n * delta;
    adam_update(*critic, mlp_backward(*critic, sa, upstream), *adam);
  }

  if (++calls_ % config_.policy_delay == 0) {
    const Eigen::MatrixXd s = sa.topRows(kObsDim);
    const Eigen::MatrixXd a = actor_.forward_batch(s);
    Eigen::MatrixXd sa_pi(kObsDim + 1, n);
    sa_pi.topRows(kObsDim) = s;
    sa_pi.row(kObsDim) = a.row(0);
    const Eigen::MatrixXd q = critic1_.forward_batch(sa_pi);
    losses.actor = -q.mean();
    // d(-mean Q1)/da through the critic's input gradient.
    const MlpGradients critic_grad =
        mlp_backward(critic1_, sa_pi, Eigen::MatrixXd::Constant(1, n, -inv_n));
    const Eigen::MatrixXd upstream = critic_grad.input.row(kObsDim);
    adam_update(actor_, mlp_backward(actor_, s, upstream), actor_adam_);
    soft_update(actor_target_, actor_, config_.tau);
    soft_update(critic1_target_, critic1_, config_.tau);
    soft_update(critic2_target_, critic2_, config_.tau);
  }
  return losses;
}

Td3Agent train_td3(const Td3Config& config, const ScalarEnvConfig& env_config,
                   const StochasticHealParams& heal, std::uint64_t seed) {
  Td3Agent agent(config, seed);
  ScalarEnv env(env_config, ActionSpace::Continuous, heal);
  Rng explore = make_rng(seed, Stream::Exploration);
  std::uint64_t episode = 0;
  Observation obs = env.reset(derive_seed(seed, Stream::Training, episode));
  for (std::int64_t step = 0; step < config.total_steps; ++step) {
    const double a = step < config.warmup ? uniform(explore, 0.0, 1.0)
                                          : agent.select_action(obs, true, explore);
    const StepOutcome out = env.step(Action::dosage(a));
    agent.remember({obs.to_array(), a, out.reward, out.observation.to_array(), out.terminal});
    if (step >= config.warmup && agent.ready()) agent.train_step();
    obs = out.terminal ? env.reset(derive_seed(seed, Stream::Training, ++episode)) : out.observation;
  }
  return agent;
}

Action ActorController::act(const Observation& obs) {
  return Action::dosage(actor_.forward(encode_observation(obs.to_array()))(0));
}

}  // namespace selfheal
