#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "selfheal/env_scalar.hpp"
#include "selfheal/rng.hpp"

namespace selfheal {

class ConfigRegistry;

struct Transition {
  std::array<double, kObsDim> obs{};
  double action = 0.0;  // intervention index or dosage
  double reward = 0.0;
  std::array<double, kObsDim> next_obs{};
  bool terminal = false;

  friend bool operator==(const Transition&, const Transition&) = default;
};

struct ReplayConfig {
  std::int64_t capacity = 10000;
  double alpha = 0.6;         // priority exponent
  double beta_start = 0.4;    // importance exponent, annealed to beta_end
  double beta_end = 1.0;
  double priority_eps = 0.01;

  void validate() const;
};

void bind_config(ConfigRegistry& registry, ReplayConfig& config, const std::string& prefix);

enum class ReplayMode { Uniform, Prioritized };

struct SampledTransition {
  std::size_t index = 0;  // storage slot, valid for update_priorities()
  Transition transition;
  double weight = 1.0;    // importance weight, 1 for uniform sampling
};

/// Fixed-capacity FIFO ring of transitions with optional proportional
/// prioritization. Sampling scans a cumulative sum, which is cheap at the
/// capacities used here.
class ReplayBuffer {
 public:
  ReplayBuffer(ReplayConfig config, ReplayMode mode);

  void push(const Transition& t);

  std::size_t size() const { return storage_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return storage_.empty(); }
  ReplayMode mode() const { return mode_; }
  const ReplayConfig& config() const { return config_; }

  /// Slot access (what sampled indices refer to).
  const Transition& slot(std::size_t index) const { return storage_.at(index); }
  /// Contents oldest-first.
  std::vector<Transition> in_insertion_order() const;

  std::vector<SampledTransition> sample_uniform(std::size_t batch, Rng& rng) const;
  /// P(i) = p_i^alpha / sum_j p_j^alpha; weights (size * P(i))^-beta scaled
  /// by the batch maximum.
  std::vector<SampledTransition> sample_prioritized(std::size_t batch, Rng& rng) const;
  /// Dispatches on mode().
  std::vector<SampledTransition> sample(std::size_t batch, Rng& rng) const;

  /// p_i <- |td_i| + priority_eps; also raises the max-priority tracker.
  void update_priorities(std::span<const std::size_t> indices, std::span<const double> td_errors);

  double priority(std::size_t index) const { return priorities_.at(index); }
  double max_priority() const { return max_priority_; }
  double beta() const { return beta_; }
  void set_beta(double beta) { beta_ = beta; }
  /// Linear anneal from beta_start to beta_end as `progress` goes 0 -> 1.
  void anneal_beta(double progress);

 private:
  ReplayConfig config_;
  ReplayMode mode_;
  std::size_t capacity_;
  std::vector<Transition> storage_;
  std::vector<double> priorities_;
  std::size_t cursor_ = 0;
  double max_priority_ = 1.0;
  double beta_;
};

/// Runs `policy` for whole episodes on `env` (episode k reset with a seed
/// derived from `seed`) and pushes transitions until `count` are stored.
/// Returns the number stored.
std::size_t prefill_from_policy(ReplayBuffer& buffer, Controller& policy, ScalarEnv& env,
                                std::size_t count, std::uint64_t seed);

}  // namespace selfheal
