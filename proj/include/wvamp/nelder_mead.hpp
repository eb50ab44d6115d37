#pragma once

#include <functional>
#include <vector>

namespace wvamp {

struct SimplexOptions {
  double f_tol = 1e-8;   // spread of function values across the simplex
  double x_tol = 1e-6;   // largest vertex distance from the best vertex, per coordinate
  int max_evals = 5000;
};

struct SimplexResult {
  std::vector<double> x;
  double f = 0.0;
  int evals = 0;
  int iterations = 0;
  bool converged = false;
};

using Objective = std::function<double(const std::vector<double>&)>;

/// Nelder-Mead simplex minimization. `step` sets the initial simplex edge
/// along each coordinate. Non-finite objective values are treated as +inf.
SimplexResult nelder_mead(const Objective& f, std::vector<double> x0, const std::vector<double>& step,
                          const SimplexOptions& opt = {});

}  // namespace wvamp
