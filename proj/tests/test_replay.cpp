#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "selfheal/baselines.hpp"
#include "selfheal/errors.hpp"
#include "selfheal/replay.hpp"

using namespace selfheal;

namespace {

Transition tagged(double tag) {
  Transition t;
  t.obs = {tag, 0.0, 0.0};
  t.reward = tag;
  return t;
}

ReplayConfig small(std::int64_t capacity) {
  ReplayConfig c;
  c.capacity = capacity;
  return c;
}

}  // namespace

TEST_CASE("ring FIFO semantics") {
  ReplayBuffer buf(small(5), ReplayMode::Uniform);
  for (int i = 0; i < 6; ++i) buf.push(tagged(i));
  CHECK(buf.size() == 5);
  auto items = buf.in_insertion_order();
  CHECK(items.front().reward == 1.0);

  for (int i = 6; i < 23; ++i) buf.push(tagged(i));
  items = buf.in_insertion_order();
  REQUIRE(items.size() == 5);
  for (int k = 0; k < 5; ++k) CHECK(items[static_cast<std::size_t>(k)].reward == 18.0 + k);
}

TEST_CASE("every stored transition is retrievable") {
  ReplayBuffer buf(small(4), ReplayMode::Uniform);
  for (int i = 0; i < 4; ++i) buf.push(tagged(i));
  std::set<std::size_t> seen;
  for (std::size_t i = 0; i < buf.size(); ++i) seen.insert(static_cast<std::size_t>(buf.slot(i).reward));
  CHECK(seen == std::set<std::size_t>{0, 1, 2, 3});
  Rng rng(1);
  std::set<double> sampled;
  for (int k = 0; k < 200; ++k)
    for (const auto& s : buf.sample_uniform(buf.size(), rng)) sampled.insert(s.transition.reward);
  CHECK(sampled.size() == 4);
}

TEST_CASE("uniform sampling") {
  Rng rng(2);
  ReplayBuffer empty(small(4), ReplayMode::Uniform);
  CHECK_THROWS_AS(empty.sample_uniform(1, rng), StateError);

  ReplayBuffer one(small(4), ReplayMode::Uniform);
  one.push(tagged(7));
  for (const auto& s : one.sample_uniform(9, rng)) CHECK(s.transition.reward == 7.0);
  CHECK(one.sample_uniform(0, rng).empty());

  ReplayBuffer four(small(4), ReplayMode::Uniform);
  for (int i = 0; i < 4; ++i) four.push(tagged(i));
  std::map<std::size_t, int> counts;
  const int n = 100000;
  for (const auto& s : four.sample_uniform(n, rng)) {
    ++counts[s.index];
    CHECK(s.weight == 1.0);
  }
  for (const auto& [idx, c] : counts) CHECK(std::abs(c / double(n) - 0.25) < 0.01);
}

TEST_CASE("prioritized sampling") {
  Rng rng(3);
  ReplayBuffer uni(small(8), ReplayMode::Uniform);
  uni.push(tagged(0));
  CHECK_THROWS_AS(uni.sample_prioritized(1, rng), StateError);
  ReplayBuffer empty(small(8), ReplayMode::Prioritized);
  CHECK_THROWS_AS(empty.sample_prioritized(1, rng), StateError);

  SUBCASE("equal priorities degenerate to uniform") {
    ReplayBuffer buf(small(4), ReplayMode::Prioritized);
    for (int i = 0; i < 4; ++i) buf.push(tagged(i));
    std::map<std::size_t, int> counts;
    const int n = 100000;
    for (const auto& s : buf.sample_prioritized(n, rng)) {
      ++counts[s.index];
      REQUIRE(s.weight == doctest::Approx(1.0));
    }
    for (const auto& [idx, c] : counts) CHECK(std::abs(c / double(n) - 0.25) < 0.01);
  }
  SUBCASE("two-item closed form") {
    ReplayBuffer buf(small(4), ReplayMode::Prioritized);
    buf.push(tagged(0));
    buf.push(tagged(1));
    const std::size_t idx[] = {0, 1};
    const double td[] = {0.5, 0.0};
    buf.update_priorities(idx, td);
    CHECK(buf.priority(0) == doctest::Approx(0.51));
    CHECK(buf.priority(1) == doctest::Approx(0.01));
    const double a = std::pow(0.51, 0.6), b = std::pow(0.01, 0.6);
    const double p0 = a / (a + b);
    int hits = 0;
    const int n = 100000;
    for (const auto& s : buf.sample_prioritized(n, rng)) hits += s.index == 0;
    CHECK(std::abs(hits / double(n) - p0) < 0.01);
  }
  SUBCASE("beta zero gives unit weights; weights lie in (0, 1]") {
    ReplayBuffer buf(small(8), ReplayMode::Prioritized);
    for (int i = 0; i < 8; ++i) buf.push(tagged(i));
    const std::size_t idx[] = {0, 3, 5};
    const double td[] = {2.0, 0.0, 0.7};
    buf.update_priorities(idx, td);
    for (const auto& s : buf.sample_prioritized(500, rng)) {
      CHECK(s.weight > 0.0);
      CHECK(s.weight <= 1.0);
    }
    buf.set_beta(0.0);
    for (const auto& s : buf.sample_prioritized(500, rng)) CHECK(s.weight == 1.0);
  }
}

TEST_CASE("priority bookkeeping") {
  ReplayBuffer buf(small(6), ReplayMode::Prioritized);
  buf.push(tagged(0));
  CHECK(buf.priority(0) == 1.0);
  for (int i = 1; i < 6; ++i) buf.push(tagged(i));
  const std::size_t i2[] = {2};
  const double zero[] = {0.0};
  buf.update_priorities(i2, zero);
  CHECK(buf.priority(2) == doctest::Approx(0.01));
  for (std::size_t k : {0u, 1u, 3u, 4u, 5u}) CHECK(buf.priority(k) == 1.0);

  const std::size_t i4[] = {4};
  const double big[] = {-3.0};
  buf.update_priorities(i4, big);
  CHECK(buf.max_priority() == doctest::Approx(3.01));
  buf.push(tagged(6));  // overwrites slot 0 with the max priority
  CHECK(buf.priority(0) == doctest::Approx(3.01));

  const std::size_t bad[] = {6};
  CHECK_THROWS_AS(buf.update_priorities(bad, zero), std::out_of_range);
  for (std::size_t k = 0; k < buf.size(); ++k) CHECK(buf.priority(k) > 0.0);
}

TEST_CASE("beta annealing") {
  ReplayBuffer buf(ReplayConfig{}, ReplayMode::Prioritized);
  CHECK(buf.beta() == doctest::Approx(0.4));
  buf.anneal_beta(0.5);
  CHECK(buf.beta() == doctest::Approx(0.7));
  buf.anneal_beta(2.0);
  CHECK(buf.beta() == doctest::Approx(1.0));
}

TEST_CASE("prefill from the heuristic") {
  ScalarEnv env(ScalarEnvConfig{}, ActionSpace::Discrete);
  HeuristicController heuristic;
  ReplayBuffer none(ReplayConfig{}, ReplayMode::Uniform);
  CHECK(prefill_from_policy(none, heuristic, env, 0, 1) == 0);
  CHECK(none.size() == 0);

  ReplayBuffer buf(ReplayConfig{}, ReplayMode::Uniform);
  CHECK(prefill_from_policy(buf, heuristic, env, 500, 1) == 500);
  CHECK(buf.size() == 500);
  int episode_starts = 0;
  for (const auto& t : buf.in_insertion_order()) {
    episode_starts += t.obs[1] == 1.0 && t.obs[2] == 0.0;
    CHECK((t.action == 0.0 || t.action == 2.0));
  }
  CHECK(episode_starts >= 5);
}
