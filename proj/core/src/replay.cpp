#include "selfheal/replay.hpp"

#include <algorithm>
#include <cmath>

#include "selfheal/config.hpp"
#include "selfheal/errors.hpp"

namespace selfheal {

void ReplayConfig::validate() const {
  if (capacity < 1) throw ConfigError("replay capacity must be >= 1");
  if (!(alpha >= 0.0)) throw ConfigError("replay alpha must be >= 0");
  if (!(beta_start >= 0.0 && beta_end >= 0.0)) throw ConfigError("replay beta must be >= 0");
  if (!(priority_eps > 0.0)) throw ConfigError("replay priority_eps must be > 0");
}

void bind_config(ConfigRegistry& r, ReplayConfig& c, const std::string& p) {
  r.bind(p + ".capacity", c.capacity, "replay buffer capacity");
  r.bind(p + ".per_alpha", c.alpha, "PER priority exponent");
  r.bind(p + ".per_beta_start", c.beta_start, "PER importance exponent at start");
  r.bind(p + ".per_beta_end", c.beta_end, "PER importance exponent at end");
  r.bind(p + ".per_eps", c.priority_eps, "PER priority floor");
}

ReplayBuffer::ReplayBuffer(ReplayConfig config, ReplayMode mode)
    : config_(config), mode_(mode), beta_(config.beta_start) {
  config_.validate();
  capacity_ = static_cast<std::size_t>(config_.capacity);
  storage_.reserve(std::min<std::size_t>(capacity_, 1 << 16));
}

void ReplayBuffer::push(const Transition& t) {
  if (storage_.size() < capacity_) {
    storage_.push_back(t);
    priorities_.push_back(max_priority_);
  } else {
    storage_[cursor_] = t;
    priorities_[cursor_] = max_priority_;
  }
  cursor_ = (cursor_ + 1) % capacity_;
}

std::vector<Transition> ReplayBuffer::in_insertion_order() const {
  std::vector<Transition> out;
  out.reserve(storage_.size());
  const std::size_t start = storage_.size() < capacity_ ? 0 : cursor_;
  for (std::size_t k = 0; k < storage_.size(); ++k) out.push_back(storage_[(start + k) % storage_.size()]);
  return out;
}

std::vector<SampledTransition> ReplayBuffer::sample_uniform(std::size_t batch, Rng& rng) const {
  if (storage_.empty()) throw StateError("cannot sample from an empty replay buffer");
  std::vector<SampledTransition> out;
  out.reserve(batch);
  for (std::size_t k = 0; k < batch; ++k) {
    const std::size_t i = uniform_index(rng, storage_.size());
    out.push_back({i, storage_[i], 1.0});
  }
  return out;
}

std::vector<SampledTransition> ReplayBuffer::sample_prioritized(std::size_t batch, Rng& rng) const {
  if (mode_ != ReplayMode::Prioritized) throw StateError("buffer is not in prioritized mode");
  if (storage_.empty()) throw StateError("cannot sample from an empty replay buffer");

  std::vector<double> cumulative(storage_.size());
  double total = 0.0;
  for (std::size_t i = 0; i < storage_.size(); ++i) {
    total += std::pow(priorities_[i], config_.alpha);
    cumulative[i] = total;
  }

  std::vector<SampledTransition> out;
  out.reserve(batch);
  const double n = static_cast<double>(storage_.size());
  double max_weight = 0.0;
  for (std::size_t k = 0; k < batch; ++k) {
    const double u = uniform(rng, 0.0, total);
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    const auto i = static_cast<std::size_t>(it - cumulative.begin());
    const double p = std::pow(priorities_[i], config_.alpha) / total;
    const double w = std::pow(n * p, -beta_);
    max_weight = std::max(max_weight, w);
    out.push_back({i, storage_[i], w});
  }
  for (auto& s : out) s.weight /= max_weight;
  return out;
}

std::vector<SampledTransition> ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
  return mode_ == ReplayMode::Prioritized ? sample_prioritized(batch, rng) : sample_uniform(batch, rng);
}

void ReplayBuffer::update_priorities(std::span<const std::size_t> indices,
                                     std::span<const double> td_errors) {
  if (indices.size() != td_errors.size()) {
    throw std::invalid_argument("update_priorities: indices and td_errors differ in length");
  }
  for (const std::size_t i : indices) {
    if (i >= storage_.size()) {
      throw std::out_of_range("update_priorities: index " + std::to_string(i) + " outside buffer of size " +
                              std::to_string(storage_.size()));
    }
  }
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const double p = std::abs(td_errors[k]) + config_.priority_eps;
    priorities_[indices[k]] = p;
    max_priority_ = std::max(max_priority_, p);
  }
}

void ReplayBuffer::anneal_beta(double progress) {
  const double t = std::clamp(progress, 0.0, 1.0);
  beta_ = config_.beta_start + t * (config_.beta_end - config_.beta_start);
}

std::size_t prefill_from_policy(ReplayBuffer& buffer, Controller& policy, ScalarEnv& env,
                                std::size_t count, std::uint64_t seed) {
  std::size_t stored = 0;
  for (std::uint64_t episode = 0; stored < count; ++episode) {
    const std::uint64_t episode_seed = derive_seed(seed, Stream::Prefill, episode);
    Observation obs = env.reset(episode_seed);
    policy.reset(episode_seed);
    while (!env.done() && stored < count) {
      const Action a = policy.act(obs);
      const StepOutcome out = env.step(a);
      buffer.push({obs.to_array(), a.encoded(), out.reward, out.observation.to_array(), out.terminal});
      obs = out.observation;
      ++stored;
    }
  }
  return stored;
}

}  // namespace selfheal
