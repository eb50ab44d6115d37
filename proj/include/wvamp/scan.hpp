#pragma once

// Precision scan of varphi over a grid of postselections (|r|, theta).

#include <iosfwd>
#include <vector>

#include "wvamp/fitter.hpp"
#include "wvamp/pseudoexp.hpp"

namespace wvamp {

struct GridSpec {
  std::vector<double> abs_r;  // values
  std::vector<double> theta;  // rad

  /// |r| = 0.1 .. 0.9 step 0.1, theta = -180 .. 180 deg step 36.
  static GridSpec standard();
  void validate() const;
};

struct ScanOptions {
  FitOptions fit;              // options of the full fit; the statistical fit fixes nuisances
  ConstraintWidths widths;
  unsigned threads = 1;
  double max_failure_fraction = 0.1;
};

/// Per-experiment outcome at one grid point.
struct PointFit {
  bool failed = false;
  double varphi_full = 0.0;
  double varphi_stat = 0.0;
  double err_hesse = 0.0;    // full fit, NaN when not requested
  double err_profile = 0.0;  // full fit, NaN when not requested
};

struct ScanPoint {
  double abs_r = 0.0;
  double theta = 0.0;
  double err_total = 0.0;  // spread of full fits
  double err_stat = 0.0;   // spread of fits with nuisances fixed
  double err_syst = 0.0;   // sqrt(max(0, total^2 - stat^2))
  double mean_err_hesse = 0.0;
  double mean_err_profile = 0.0;
  std::size_t n_failed = 0;
  std::size_t n_experiments = 0;
  bool flagged = false;     // failure fraction above the configured limit
  std::vector<PointFit> fits;
};

struct ScanResult {
  std::vector<ScanPoint> points;  // abs_r major, theta minor
};

/// Sample standard deviation of angles about their mean, with each value
/// first wrapped relative to `reference`.
double angular_spread(const std::vector<double>& values, double reference);

/// Runs one ensemble at the (|r|, theta) of config.model.signal.
ScanPoint scan_point(const EnsembleConfig& config, const ScanOptions& options);

ScanResult scan(const GridSpec& grid, const EnsembleConfig& config, const ScanOptions& options);

/// CSV: abs_r,theta_deg,err_total_deg,err_stat_deg,err_syst_deg,n_failed.
void write_scan_csv(std::ostream& os, const ScanResult& result);

}  // namespace wvamp
