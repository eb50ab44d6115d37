#pragma once

// Double-sided crystal ball: Gaussian core with power-law tails on both sides.

namespace wvamp {

struct ResolutionParams {
  double mu = 0.0;     // ps
  double sigma = 0.8;  // ps
  double alpha_L = 1.2;
  double alpha_H = 1.5;
  double n_L = 3.0;
  double n_H = 4.0;

  void validate() const;
};

class CrystalBall {
 public:
  explicit CrystalBall(const ResolutionParams& rp);

  const ResolutionParams& params() const { return rp_; }

  /// Unnormalized shape in the standardized variable X = (x - mu)/sigma.
  /// Equal to 1 at X = 0.
  double shape(double X) const;

  /// Normalized density in X (integrates to 1 over X).
  double std_density(double X) const { return shape(X) * inv_area_; }

  /// Normalized density in x.
  double density(double x) const { return std_density((x - rp_.mu) / rp_.sigma) / rp_.sigma; }

  double std_cdf(double X) const;
  double cdf(double x) const { return std_cdf((x - rp_.mu) / rp_.sigma); }

  /// Inverse of std_cdf for u in (0, 1).
  double std_quantile(double u) const;
  double quantile(double u) const { return rp_.mu + rp_.sigma * std_quantile(u); }

  /// Integral of shape() over the real line.
  double area() const { return 1.0 / inv_area_; }

  double tail_area_low() const { return tail_low_; }
  double tail_area_high() const { return tail_high_; }
  double core_area() const { return core_; }

  /// Shape value at the transition points, e^{-alpha^2/2}.
  double edge_low() const { return edge_low_; }
  double edge_high() const { return edge_high_; }

 private:
  ResolutionParams rp_;
  double edge_low_, edge_high_;
  double tail_low_, tail_high_, core_;
  double inv_area_;
};

/// Normalized resolution density at residual x.
double resolution(double x, const ResolutionParams& rp);

}  // namespace wvamp
