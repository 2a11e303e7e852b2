#include "selfheal/env_grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "selfheal/config.hpp"
#include "selfheal/errors.hpp"

namespace selfheal {

void GridConfig::validate() const {
  if (n < 3) throw ConfigError("grid.n must be >= 3");
  if (!(growth_gain > 0.0)) throw ConfigError("grid.growth_gain must be > 0");
  if (!(stress_threshold > 0.0)) throw ConfigError("grid.stress_threshold must be > 0");
  if (!(wear_sigma >= 0.0)) throw ConfigError("grid.wear_sigma must be >= 0");
  if (!(heal_amplitude > 0.0)) throw ConfigError("grid.heal_amplitude must be > 0");
  if (!(heal_radius > 0.0)) throw ConfigError("grid.heal_radius must be > 0");
  if (!(obs_noise_sigma >= 0.0)) throw ConfigError("grid.obs_noise_sigma must be >= 0");
  if (horizon < 1) throw ConfigError("grid.horizon must be >= 1");
  if (!(init_central_defect >= 0.0 && init_central_defect <= 1.0)) {
    throw ConfigError("grid.init_central_defect must lie in [0, 1]");
  }
  if (!(target_initial_integrity > 0.0 && target_initial_integrity <= 1.0)) {
    throw ConfigError("grid.target_initial_integrity must lie in (0, 1]");
  }
  if (!(defect_width > 0.0)) throw ConfigError("grid.defect_width must be > 0");
  if (!(speckle >= 0.0 && speckle <= 1.0)) throw ConfigError("grid.speckle must lie in [0, 1]");
}

void bind_config(ConfigRegistry& r, GridConfig& c, const std::string& p) {
  r.bind(p + ".n", c.n, "grid side length");
  r.bind(p + ".growth_gain", c.growth_gain, "damage growth per unit stress above threshold");
  r.bind(p + ".stress_threshold", c.stress_threshold, "stress level that triggers growth");
  r.bind(p + ".wear_sigma", c.wear_sigma, "per-cell wear noise std");
  r.bind(p + ".heal_amplitude", c.heal_amplitude, "heal kernel peak");
  r.bind(p + ".heal_radius", c.heal_radius, "heal kernel std in cells");
  r.bind(p + ".obs_noise_sigma", c.obs_noise_sigma, "observation noise std");
  r.bind(p + ".horizon", c.horizon, "steps per episode");
  r.bind(p + ".init_central_defect", c.init_central_defect, "central defect peak (0 = solve)");
  r.bind(p + ".target_initial_integrity", c.target_initial_integrity,
         "initial integrity the defect peak is solved for");
  r.bind(p + ".defect_width", c.defect_width, "central defect std in cells");
  r.bind(p + ".speckle", c.speckle, "initial per-cell speckle upper bound");
}

double DamageField::mean() const {
  if (cells_.empty()) return 0.0;
  double s = 0.0;
  for (double v : cells_) s += v;
  return s / static_cast<double>(cells_.size());
}

double DamageField::center_mean() const {
  const std::size_t c = n_ / 2;
  double s = 0.0;
  for (std::size_t r = c - 1; r <= c + 1; ++r) {
    for (std::size_t k = c - 1; k <= c + 1; ++k) s += (*this)(r, k);
  }
  return s / 9.0;
}

DamageField laplacian_signed(const DamageField& f) {
  const std::size_t n = f.n();
  DamageField out(n);
  // Ghost cells mirror the boundary cell itself, so flux across the edge is zero.
  auto at = [&](std::ptrdiff_t r, std::ptrdiff_t c) {
    const auto last = static_cast<std::ptrdiff_t>(n) - 1;
    return f(static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(r, 0, last)),
             static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(c, 0, last)));
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto r = static_cast<std::ptrdiff_t>(i);
      const auto c = static_cast<std::ptrdiff_t>(j);
      out(i, j) = at(r - 1, c) + at(r + 1, c) + at(r, c - 1) + at(r, c + 1) - 4.0 * f(i, j);
    }
  }
  return out;
}

DamageField laplacian(const DamageField& f) {
  DamageField s = laplacian_signed(f);
  for (double& v : s.cells()) v = std::abs(v);
  return s;
}

double grid_step(const GridConfig& config, DamageField& field,
                 const std::optional<GridAction>& action, Rng& rng) {
  const std::size_t n = field.n();
  if (action && (action->row >= n || action->col >= n)) {
    throw std::out_of_range("grid action (" + std::to_string(action->row) + ", " +
                            std::to_string(action->col) + ") outside " + std::to_string(n) +
                            "x" + std::to_string(n) + " grid");
  }

  const DamageField stress = laplacian(field);
  auto& cells = field.cells();
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (stress.cells()[k] > config.stress_threshold) cells[k] += config.growth_gain * stress.cells()[k];
  }
  if (config.wear_sigma > 0.0) {
    std::normal_distribution<double> wear(0.0, config.wear_sigma);
    for (double& v : cells) v += std::max(0.0, wear(rng));
  }
  if (action) {
    const double dosage = std::clamp(action->dosage, 0.0, 1.0);
    const double two_sigma2 = 2.0 * config.heal_radius * config.heal_radius;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double di = static_cast<double>(i) - static_cast<double>(action->row);
        const double dj = static_cast<double>(j) - static_cast<double>(action->col);
        field(i, j) -= dosage * config.heal_amplitude * std::exp(-(di * di + dj * dj) / two_sigma2);
      }
    }
  }
  for (double& v : cells) v = std::clamp(v, 0.0, 1.0);
  return integrity_of(field);
}

DamageField observe(const DamageField& field, double noise_sigma, Rng& rng) {
  DamageField out = field;
  if (noise_sigma <= 0.0) return out;
  std::normal_distribution<double> noise(0.0, noise_sigma);
  for (double& v : out.cells()) v = std::clamp(v + noise(rng), 0.0, 1.0);
  return out;
}

DamageField initial_field(const GridConfig& config, Rng& rng) {
  const auto n = static_cast<std::size_t>(config.n);
  const double centre = (static_cast<double>(n) - 1.0) / 2.0;
  DamageField shape(n);
  DamageField speckle(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double di = static_cast<double>(i) - centre;
      const double dj = static_cast<double>(j) - centre;
      shape(i, j) = std::exp(-(di * di + dj * dj) / (2.0 * config.defect_width * config.defect_width));
      speckle(i, j) = uniform(rng, 0.0, config.speckle);
    }
  }

  auto build = [&](double peak) {
    DamageField f(n);
    for (std::size_t k = 0; k < f.cells().size(); ++k) {
      f.cells()[k] = std::clamp(peak * shape.cells()[k] + speckle.cells()[k], 0.0, 1.0);
    }
    return f;
  };

  if (config.init_central_defect > 0.0) return build(config.init_central_defect);

  // Integrity is monotone in the peak, so bisection converges.
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (integrity_of(build(mid)) > config.target_initial_integrity) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return build(0.5 * (lo + hi));
}

std::string export_heatmap(const DamageField& field) {
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < field.n(); ++i) {
    for (std::size_t j = 0; j < field.n(); ++j) {
      std::snprintf(buf, sizeof buf, "%.5f", field(i, j));
      if (j > 0) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

DamageField parse_heatmap(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  const std::size_t n = rows.size();
  DamageField f(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) {
      throw std::invalid_argument("heatmap row " + std::to_string(i) + " has " +
                                  std::to_string(rows[i].size()) + " values, expected " +
                                  std::to_string(n));
    }
    for (std::size_t j = 0; j < n; ++j) f(i, j) = rows[i][j];
  }
  return f;
}

GridEnv::GridEnv(GridConfig config) : config_(config) { config_.validate(); }

const DamageField& GridEnv::reset(std::uint64_t seed) {
  config_.validate();
  dynamics_rng_ = make_rng(seed, Stream::Damage);
  observation_rng_ = make_rng(seed, Stream::Observation);
  Rng init_rng = make_rng(seed, Stream::Init);
  field_ = initial_field(config_, init_rng);
  initial_ = field_;
  step_ = 0;
  return field_;
}

double GridEnv::step(const std::optional<GridAction>& action) {
  if (done()) throw ProtocolError("grid step() called after the horizon; call reset() first");
  const double h = grid_step(config_, field_, action, dynamics_rng_);
  ++step_;
  return h;
}

DamageField GridEnv::observe() {
  return selfheal::observe(field_, config_.obs_noise_sigma, observation_rng_);
}

}  // namespace selfheal
