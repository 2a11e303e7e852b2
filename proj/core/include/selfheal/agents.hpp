#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "selfheal/env_scalar.hpp"
#include "selfheal/nn.hpp"
#include "selfheal/replay.hpp"
#include "selfheal/rng.hpp"

namespace selfheal {

class ConfigRegistry;

// ---------------------------------------------------------------------------
// Shared helpers

/// Linear interpolation from `start` to `end` over progress in [0, 1].
double linear_schedule(double start, double end, double progress);

/// With probability epsilon a uniform index, otherwise the argmax with the
/// lowest index winning ties.
std::size_t epsilon_greedy(std::span<const double> values, double epsilon, Rng& rng);

/// Fixed affine rescaling of an observation into network input features.
Eigen::VectorXd encode_observation(const std::array<double, kObsDim>& obs);
Eigen::MatrixXd encode_observations(std::span<const std::array<double, kObsDim>> batch);

// ---------------------------------------------------------------------------
// Tabular Q-learning

struct QLearningConfig {
  std::int64_t bins = 20;
  double alpha = 0.1;
  double gamma = 0.95;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay_fraction = 0.6;  // of training episodes
  std::int64_t episodes = 300;

  void validate() const;
  double epsilon(std::int64_t episode) const;
};

void bind_config(ConfigRegistry& registry, QLearningConfig& config, const std::string& prefix = "qlearning");

/// Dense Q(s, a) over integrity bins x interventions.
class QTable {
 public:
  explicit QTable(QLearningConfig config = {});

  std::size_t bins() const { return bins_; }
  const QLearningConfig& config() const { return config_; }
  double value(std::size_t s, std::size_t a) const;
  void set_value(std::size_t s, std::size_t a, double v);
  std::span<const double> values(std::size_t s) const;
  std::size_t greedy(std::size_t s) const;
  std::size_t state_of(const Observation& obs) const { return discretize(obs.integrity, bins_); }

  /// delta = r + gamma * (terminal ? 0 : max Q(s', .)) - Q(s, a);
  /// Q(s, a) += alpha * delta. Returns delta.
  double q_update(std::size_t s, std::size_t a, double reward, std::size_t s_next, bool terminal);

  /// CSV "bin,action,value", preceded by '#' provenance lines.
  void save_csv(std::ostream& out, const std::string& provenance = {}) const;
  static QTable load_csv(std::istream& in, QLearningConfig config = {});

 private:
  void check(std::size_t s, std::size_t a) const;

  QLearningConfig config_;
  std::size_t bins_;
  std::vector<double> table_;
};

/// Trains on the discrete scalar environment for config.episodes episodes.
QTable train_qlearning(const QLearningConfig& config, const ScalarEnvConfig& env_config,
                       const StochasticHealParams& heal, std::uint64_t seed);

class QTableController final : public Controller {
 public:
  explicit QTableController(QTable table) : table_(std::move(table)) {}
  ActionSpace action_space() const override { return ActionSpace::Discrete; }
  Action act(const Observation& obs) override;
  const QTable& table() const { return table_; }

 private:
  QTable table_;
};

// ---------------------------------------------------------------------------
// DQN

enum class DqnVariant { Uniform, Prioritized, Transfer };
const char* dqn_variant_name(DqnVariant v);

struct DqnConfig {
  std::int64_t hidden = 64;
  std::int64_t hidden_layers = 2;
  double gamma = 0.98;
  double lr = 1e-3;
  std::int64_t batch = 64;
  std::int64_t sync_period = 100;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay_fraction = 0.5;  // of total training steps
  std::int64_t episodes = 300;
  std::int64_t learning_starts = 64;
  std::int64_t prefill = 500;
  ReplayConfig replay;

  void validate() const;
};

void bind_config(ConfigRegistry& registry, DqnConfig& config, const std::string& prefix = "dqn");

/// Online and target Q-networks over the 3-d observation, one output per
/// intervention, trained from a replay buffer.
class DqnAgent {
 public:
  DqnAgent(DqnConfig config, DqnVariant variant, std::uint64_t seed);

  std::array<double, kNumInterventions> q_values(const Observation& obs) const;
  Intervention greedy_action(const Observation& obs) const;
  /// Epsilon-greedy using the agent's exploration stream.
  Intervention act(const Observation& obs, double epsilon);

  void remember(const Transition& t) { buffer_.push(t); }
  bool ready() const;
  /// One minibatch update of the online network. Returns the loss.
  /// Throws StateError while the buffer holds fewer than `batch` items.
  double train_step();
  void set_progress(double progress) { buffer_.anneal_beta(progress); }
  void sync_target() { target_ = online_; }

  /// Replaces both networks and resets the optimizer.
  void set_networks(Mlp online, Mlp target);

  const DqnConfig& config() const { return config_; }
  DqnVariant variant() const { return variant_; }
  ReplayBuffer& buffer() { return buffer_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const Mlp& online() const { return online_; }
  const Mlp& target() const { return target_; }
  std::int64_t train_steps() const { return train_steps_; }

 private:
  DqnConfig config_;
  DqnVariant variant_;
  Mlp online_;
  Mlp target_;
  AdamState adam_;
  ReplayBuffer buffer_;
  Rng sample_rng_;
  Rng explore_rng_;
  std::int64_t train_steps_ = 0;
};

/// Full training run: prefill for the transfer variant, then
/// config.episodes episodes with a linear epsilon schedule.
DqnAgent train_dqn(const DqnConfig& config, DqnVariant variant, const ScalarEnvConfig& env_config,
                   const StochasticHealParams& heal, std::uint64_t seed);

/// Network-only greedy controller (no exploration).
class QNetworkController final : public Controller {
 public:
  explicit QNetworkController(Mlp net) : net_(std::move(net)) {}
  ActionSpace action_space() const override { return ActionSpace::Discrete; }
  Action act(const Observation& obs) override;
  const Mlp& network() const { return net_; }

 private:
  Mlp net_;
};

// ---------------------------------------------------------------------------
// TD3

struct Td3Config {
  std::int64_t hidden = 64;
  std::int64_t hidden_layers = 2;
  double gamma = 0.98;
  double tau = 0.005;
  std::int64_t policy_delay = 2;
  double target_noise = 0.2;
  double noise_clip = 0.5;
  double explore_noise = 0.1;
  std::int64_t batch = 64;
  std::int64_t warmup = 500;
  std::int64_t total_steps = 30000;
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  ReplayConfig replay;

  void validate() const;
};

void bind_config(ConfigRegistry& registry, Td3Config& config, const std::string& prefix = "td3");

struct Td3Losses {
  double critic = 0.0;
  std::optional<double> actor;
};

/// Deterministic actor with a sigmoid head plus twin critics over
/// (observation, dosage), each with a soft-updated target copy.
class Td3Agent {
 public:
  Td3Agent(Td3Config config, std::uint64_t seed);

  /// actor(obs) + N(0, explore_noise) when exploring, clamped to [0, 1].
  double select_action(const Observation& obs, bool explore, Rng& rng) const;

  void remember(const Transition& t) { buffer_.push(t); }
  bool ready() const { return buffer_.size() >= static_cast<std::size_t>(config_.batch); }
  Td3Losses train_step();

  /// Twin-min bootstrapped targets with clipped target-policy smoothing.
  Eigen::VectorXd compute_targets(std::span<const Transition> batch);

  /// Replaces the networks (targets copied from the online ones when not
  /// given) and resets all optimizers.
  void set_networks(Mlp actor, Mlp critic1, Mlp critic2);
  void set_target_networks(Mlp actor, Mlp critic1, Mlp critic2);

  const Td3Config& config() const { return config_; }
  Td3Config& mutable_config() { return config_; }
  const Mlp& actor() const { return actor_; }
  const Mlp& critic1() const { return critic1_; }
  const Mlp& critic2() const { return critic2_; }
  const Mlp& actor_target() const { return actor_target_; }
  const Mlp& critic1_target() const { return critic1_target_; }
  const Mlp& critic2_target() const { return critic2_target_; }
  ReplayBuffer& buffer() { return buffer_; }
  std::int64_t train_calls() const { return calls_; }

 private:
  Td3Config config_;
  Mlp actor_, critic1_, critic2_;
  Mlp actor_target_, critic1_target_, critic2_target_;
  AdamState actor_adam_, critic1_adam_, critic2_adam_;
  ReplayBuffer buffer_;
  Rng sample_rng_;
  Rng noise_rng_;
  std::int64_t calls_ = 0;
};

/// Continuous-dosage training: uniform-random warmup, then exploratory
/// actor steps with one train_step per environment step.
Td3Agent train_td3(const Td3Config& config, const ScalarEnvConfig& env_config,
                   const StochasticHealParams& heal, std::uint64_t seed);

class ActorController final : public Controller {
 public:
  explicit ActorController(Mlp actor) : actor_(std::move(actor)) {}
  ActionSpace action_space() const override { return ActionSpace::Continuous; }
  Action act(const Observation& obs) override;
  const Mlp& network() const { return actor_; }

 private:
  Mlp actor_;
};

}  // namespace selfheal
