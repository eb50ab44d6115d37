#pragma once

// Run configuration: one nested JSON document, angles in degrees.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "wvamp/dynamics.hpp"
#include "wvamp/likelihood.hpp"
#include "wvamp/postselection_map.hpp"
#include "wvamp/pseudoexp.hpp"
#include "wvamp/scan.hpp"

namespace wvamp {

struct PhysicsConfig {
  double mass = 0.0;          // 1/ps; a global phase only
  double tau = 1.519;         // ps
  double delta_m = 0.506;     // 1/ps
  double delta_gamma = 0.0;   // 1/ps
  double abs_p = 0.70710678118654752;
  double varphi_deg = 44.4;
};

struct SelectionConfig {
  double abs_r = 0.5;
  double theta_deg = 0.0;
  std::optional<DecayModeSpec> decay_mode;  // overrides abs_r/theta when present
};

struct LifetimeGrid {
  double abs_r_min = 0.01, abs_r_max = 0.99;
  std::size_t abs_r_steps = 99;
  double theta_deg_min = -180.0, theta_deg_max = 180.0;
  std::size_t theta_steps = 73;
};

struct PdfGrid {
  double t_min = -150.0, t_max = 150.0;  // ps; wide enough for the power-law tails
  std::size_t points = 30001;
  std::vector<double> conditional_abs_r{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
};

struct RunSettings {
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::size_t n_experiments = 200;
  std::size_t events_per_experiment = 3200;
  YieldMode yield_mode = YieldMode::Fixed;
  std::optional<double> poisson_mean;  // defaults to the expected yield
  double b0_fraction = 0.5;
  int restarts = 3;
  bool compute_profile = true;
  bool full_scan = false;
  std::vector<double> scan_abs_r{0.5, 0.7};
  std::vector<double> scan_theta_deg{0.0};
  LifetimeGrid lifetime;
  PdfGrid pdf;
};

struct IoSettings {
  std::string out_dir = "out";
  std::string format = "csv";  // csv or binary
};

struct RunConfig {
  PhysicsConfig physics;
  SelectionConfig selection;
  DetectorConfig detector;
  ResolutionParams resolution;
  BackgroundParams background;
  ConstraintWidths constraints;
  RunSettings run;
  IoSettings io;

  MesonParams meson() const;
  MixingParams mixing() const;
  Postselection postselection() const;
  ObservableModel model() const;
  EnsembleConfig ensemble() const;
  GridSpec scan_grid() const;
  FitOptions fit_options() const;
  void validate() const;
};

/// Parses a document; missing keys take defaults, unknown keys raise ConfigError.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

/// Fully resolved document, suitable for reproducing a run.
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace wvamp
