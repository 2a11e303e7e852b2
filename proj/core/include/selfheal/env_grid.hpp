#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "selfheal/rng.hpp"

namespace selfheal {

class ConfigRegistry;

struct GridConfig {
  std::int64_t n = 16;
  double growth_gain = 0.1;
  double stress_threshold = 0.05;
  double wear_sigma = 0.001;
  double heal_amplitude = 0.5;
  double heal_radius = 1.5;
  double obs_noise_sigma = 0.02;
  std::int64_t horizon = 120;
  /// Peak of the central Gaussian defect. 0 means "solve for the peak that
  /// puts the initial integrity at target_initial_integrity".
  double init_central_defect = 0.0;
  double target_initial_integrity = 0.91;
  double defect_width = 3.0;
  /// Initial speckle is Uniform(0, speckle) per cell.
  double speckle = 0.002;

  void validate() const;
};

void bind_config(ConfigRegistry& registry, GridConfig& config, const std::string& prefix = "grid");

/// n x n damage fractions, row-major.
class DamageField {
 public:
  DamageField() = default;
  explicit DamageField(std::size_t n, double fill = 0.0) : n_(n), cells_(n * n, fill) {}

  std::size_t n() const { return n_; }
  double& operator()(std::size_t r, std::size_t c) { return cells_[r * n_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return cells_[r * n_ + c]; }
  std::vector<double>& cells() { return cells_; }
  const std::vector<double>& cells() const { return cells_; }

  double mean() const;
  /// Mean of the 3x3 block centred on the middle cell.
  double center_mean() const;

  friend bool operator==(const DamageField&, const DamageField&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> cells_;
};

struct GridAction {
  std::size_t row = 0;
  std::size_t col = 0;
  double dosage = 1.0;

  friend bool operator==(const GridAction&, const GridAction&) = default;
};

/// Signed 5-point Laplacian with mirrored (zero-flux) ghost cells.
DamageField laplacian_signed(const DamageField& field);
/// Stress = |laplacian|.
DamageField laplacian(const DamageField& field);

inline double integrity_of(const DamageField& field) { return 1.0 - field.mean(); }

/// One surrogate step, in place: threshold growth from stress, clipped
/// Gaussian wear, optional Gaussian heal kernel, clamp to [0, 1].
/// Returns the new integrity.
double grid_step(const GridConfig& config, DamageField& field,
                 const std::optional<GridAction>& action, Rng& rng);

/// Noisy view: field + N(0, sigma^2) per cell, clamped to [0, 1].
DamageField observe(const DamageField& field, double noise_sigma, Rng& rng);

/// Central Gaussian defect plus uniform speckle.
DamageField initial_field(const GridConfig& config, Rng& rng);

/// n comma-separated rows, fixed 5 decimals, LF line endings.
std::string export_heatmap(const DamageField& field);
DamageField parse_heatmap(std::string_view text);

/// Single-owner grid environment. Dynamics and observation noise use
/// separate streams so that paired controllers see identical wear.
class GridEnv {
 public:
  explicit GridEnv(GridConfig config);

  const DamageField& reset(std::uint64_t seed);
  double step(const std::optional<GridAction>& action);
  DamageField observe();

  const DamageField& true_field() const { return field_; }
  const DamageField& initial() const { return initial_; }
  double integrity() const { return integrity_of(field_); }
  std::int64_t steps_taken() const { return step_; }
  bool done() const { return step_ >= config_.horizon; }
  const GridConfig& config() const { return config_; }

 private:
  GridConfig config_;
  DamageField field_;
  DamageField initial_;
  Rng dynamics_rng_;
  Rng observation_rng_;
  std::int64_t step_ = 0;
};

}  // namespace selfheal
