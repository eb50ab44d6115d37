#pragma once

// Maximum-likelihood fit of varphi with profiled nuisance parameters.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "wvamp/likelihood.hpp"

namespace wvamp {

struct NuisanceParam {
  std::string name;
  double nominal = 0.0;
  double constraint_width = 0.0;
  double fitted = 0.0;
};

struct FitResult {
  double varphi_hat = 0.0;          // rad, in (-pi, pi]
  double varphi_err_profile = 0.0;  // rad, NaN when not computed
  double varphi_err_hesse = 0.0;    // rad, NaN when not computed
  std::vector<NuisanceParam> nuisances;
  double nll_min = 0.0;
  bool converged = false;
  std::size_t n_iterations = 0;
};

struct FitOptions {
  bool float_nuisances = true;
  bool compute_profile = true;
  bool compute_hesse = false;
  double start_varphi = 0.0;      // rad
  int restarts = 3;
  std::uint64_t seed = 1;         // drives restart perturbations
  double tolerance = 1e-6;        // NLL improvement required to accept a restart
  int max_evals = 4000;           // per simplex run
};

/// Distance d in (0, pi/2] at which excess(d), the NLL rise at distance d from
/// the minimum along one direction, reaches 0.5; located to 1e-4 rad. Raises
/// NumericFailure when the rise stays below 0.5 up to pi/2.
double crossing_distance(const std::function<double(double)>& excess, double first_step = 0.02);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

class Fitter {
 public:
  Fitter(const ObservableModel& model, const ConstraintWidths& widths, FitOptions options = {});

  FitResult minimize(const Dataset& data) const;

  /// Half-width of the interval where the profiled NLL rises by 0.5. Raises
  /// NumericFailure when either side is not bracketed within pi/2.
  double profile_uncertainty(const Likelihood& nll, const FitResult& fit) const;

  /// Asymptotic error from the numerical Hessian of the NLL at the minimum.
  double hesse_uncertainty(const Likelihood& nll, const FitResult& fit) const;

  const FitOptions& options() const { return options_; }
  const ObservableModel& model() const { return model_; }
  const ConstraintWidths& widths() const { return widths_; }

 private:
  ObservableModel model_;
  ConstraintWidths widths_;
  FitOptions options_;
};

nlohmann::json to_json(const FitResult& r);

}  // namespace wvamp
