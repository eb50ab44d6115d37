#include "wvamp/crystal_ball.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <sstream>

#include "wvamp/errors.hpp"

namespace wvamp {

namespace {

constexpr double kSqrtHalfPi = 1.2533141373155002512;
constexpr double kSqrt2 = 1.4142135623730950488;

}  // namespace

void ResolutionParams::validate() const {
  std::ostringstream os;
  if (!std::isfinite(mu)) os << "mu must be finite; ";
  if (!(sigma > 0.0) || !std::isfinite(sigma)) os << "sigma must be positive; ";
  if (!(alpha_L > 0.0) || !std::isfinite(alpha_L)) os << "alpha_L must be positive; ";
  if (!(alpha_H > 0.0) || !std::isfinite(alpha_H)) os << "alpha_H must be positive; ";
  if (!(n_L > 1.0) || !std::isfinite(n_L)) os << "n_L must exceed 1; ";
  if (!(n_H > 1.0) || !std::isfinite(n_H)) os << "n_H must exceed 1; ";
  const std::string msg = os.str();
  if (!msg.empty()) throw InvalidArgument("invalid resolution parameters: " + msg);
}

CrystalBall::CrystalBall(const ResolutionParams& rp) : rp_(rp) {
  rp_.validate();
  edge_low_ = std::exp(-0.5 * rp_.alpha_L * rp_.alpha_L);
  edge_high_ = std::exp(-0.5 * rp_.alpha_H * rp_.alpha_H);
  tail_low_ = edge_low_ * rp_.n_L / (rp_.alpha_L * (rp_.n_L - 1.0));
  tail_high_ = edge_high_ * rp_.n_H / (rp_.alpha_H * (rp_.n_H - 1.0));
  core_ = kSqrtHalfPi * (std::erf(rp_.alpha_H / kSqrt2) + std::erf(rp_.alpha_L / kSqrt2));
  inv_area_ = 1.0 / (tail_low_ + core_ + tail_high_);
}

double CrystalBall::shape(double X) const {
  if (X < -rp_.alpha_L) {
    const double w = rp_.alpha_L / rp_.n_L * (rp_.n_L / rp_.alpha_L - rp_.alpha_L - X);
    return edge_low_ * std::pow(w, -rp_.n_L);
  }
  if (X > rp_.alpha_H) {
    const double w = rp_.alpha_H / rp_.n_H * (rp_.n_H / rp_.alpha_H - rp_.alpha_H + X);
    return edge_high_ * std::pow(w, -rp_.n_H);
  }
  return std::exp(-0.5 * X * X);
}

double CrystalBall::std_cdf(double X) const {
  if (X < -rp_.alpha_L) {
    const double w = rp_.alpha_L / rp_.n_L * (rp_.n_L / rp_.alpha_L - rp_.alpha_L - X);
    return tail_low_ * std::pow(w, 1.0 - rp_.n_L) * inv_area_;
  }
  if (X > rp_.alpha_H) {
    const double w = rp_.alpha_H / rp_.n_H * (rp_.n_H / rp_.alpha_H - rp_.alpha_H + X);
    return 1.0 - tail_high_ * std::pow(w, 1.0 - rp_.n_H) * inv_area_;
  }
  const double core = kSqrtHalfPi * (std::erf(X / kSqrt2) + std::erf(rp_.alpha_L / kSqrt2));
  return (tail_low_ + core) * inv_area_;
}

double CrystalBall::std_quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw InvalidArgument("quantile requires u in (0, 1)");
  const double a = u / inv_area_;
  if (a < tail_low_) {
    const double w = std::pow(a / tail_low_, -1.0 / (rp_.n_L - 1.0));
    return rp_.n_L / rp_.alpha_L - rp_.alpha_L - rp_.n_L / rp_.alpha_L * w;
  }
  const double upper = (1.0 - u) / inv_area_;
  if (upper < tail_high_) {
    const double w = std::pow(upper / tail_high_, -1.0 / (rp_.n_H - 1.0));
    return rp_.n_H / rp_.alpha_H * w - rp_.n_H / rp_.alpha_H + rp_.alpha_H;
  }
  // Solve from whichever end of the core is closer to keep erf_inv well conditioned.
  const double from_low = (a - tail_low_) / kSqrtHalfPi - std::erf(rp_.alpha_L / kSqrt2);
  const double from_high = std::erf(rp_.alpha_H / kSqrt2) - (upper - tail_high_) / kSqrtHalfPi;
  double e = (a - tail_low_ < upper - tail_high_) ? from_low : from_high;
  e = std::clamp(e, -1.0 + 1e-16, 1.0 - 1e-16);
  const double X = kSqrt2 * boost::math::erf_inv(e);
  return std::clamp(X, -rp_.alpha_L, rp_.alpha_H);
}

double resolution(double x, const ResolutionParams& rp) { return CrystalBall(rp).density(x); }

}  // namespace wvamp
