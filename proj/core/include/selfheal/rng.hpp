#pragma once

#include <cstdint>
#include <random>

namespace selfheal {

using Rng = std::mt19937_64;

/// Independent random streams derived from one base seed. Each consumer
/// draws from its own stream so that, e.g., evaluation episodes never share
/// seeds with training episodes.
enum class Stream : std::uint64_t {
  Training = 1,
  Evaluation = 2,
  Exploration = 3,
  Init = 4,
  Prefill = 5,
  Damage = 6,
  Healing = 7,
  Observation = 8,
  Policy = 9,
  Sampling = 10,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic seed for item `index` of `stream` under `base`.
std::uint64_t derive_seed(std::uint64_t base, Stream stream, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t base, Stream stream, std::uint64_t index = 0) {
  return Rng(derive_seed(base, stream, index));
}

double uniform(Rng& rng, double lo, double hi);
double standard_normal(Rng& rng);
bool bernoulli(Rng& rng, double p);
/// Beta(a, b) via the ratio of two gamma variates.
double beta_sample(Rng& rng, double a, double b);
std::size_t uniform_index(Rng& rng, std::size_t n);

}  // namespace selfheal
