#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <sstream>

#include "wvamp/errors.hpp"
#include "wvamp/experiment_model.hpp"

namespace wvamp {

namespace {

constexpr int kOrder = 8;
constexpr double kCoverage = 40.0;  // kernel reach in units of the longest lifetime
constexpr double kCoreWidth = 0.5;
constexpr double kTailGrowth = 0.3;
constexpr double kMaxDecay = 2.0;   // largest k*h allowed in one panel

struct Rule {
  std::array<double, kOrder> x, w;  // on [0, 1]
};

const Rule& rule() {
  static const Rule r = [] {
    using G = boost::math::quadrature::gauss<double, kOrder>;
    Rule out;
    const auto& a = G::abscissa();
    const auto& w = G::weights();
    for (std::size_t i = 0; i < a.size(); ++i) {
      out.x[2 * i] = 0.5 * (1.0 - a[i]);
      out.x[2 * i + 1] = 0.5 * (1.0 + a[i]);
      out.w[2 * i] = out.w[2 * i + 1] = 0.5 * w[i];
    }
    return out;
  }();
  return r;
}

}  // namespace

ResolutionConvolver::ResolutionConvolver(const ResolutionParams& rp, double tau, double delta_m, double tau_bkg,
                                         double t_lo, double t_hi)
    : cb_(rp), tau_(tau), delta_m_(delta_m), tau_bkg_(tau_bkg), t_lo_(t_lo), t_hi_(t_hi) {
  if (!(tau > 0.0) || !(tau_bkg > 0.0) || !std::isfinite(delta_m))
    throw InvalidArgument("convolver needs positive lifetimes and a finite delta_m");
  if (!(t_lo <= t_hi) || !std::isfinite(t_lo) || !std::isfinite(t_hi))
    throw InvalidArgument("convolver needs a finite range with t_lo <= t_hi");
  const double sigma = rp.sigma;
  k_exp_ = sigma / tau;
  k_bkg_ = sigma / tau_bkg;
  omega_ = sigma * delta_m;
  build_grid((t_lo - rp.mu) / sigma, (t_hi - rp.mu) / sigma);
  tabulate();
}

void ResolutionConvolver::build_grid(double z_lo, double z_hi) {
  const ResolutionParams& rp = cb_.params();
  const double reach = kCoverage * std::max(tau_, tau_bkg_) / rp.sigma;
  const double lo = z_lo - reach;
  const double hi = z_hi + reach;
  const double k_max = std::max({k_exp_, k_bkg_, std::hypot(k_exp_, omega_)});
  const double h_decay = kMaxDecay / k_max;

  auto march = [&](double from, double to, auto width) {
    // Panels from `from` towards `to`, widths chosen at the end nearer `from`.
    std::vector<double> pts{from};
    const double dir = to > from ? 1.0 : -1.0;
    double x = from;
    while (dir * (to - x) > 0.0) {
      const double h = std::min(width(x), h_decay);
      const double next = dir * (to - (x + dir * h)) < 0.25 * h ? to : x + dir * h;
      pts.push_back(next);
      x = next;
    }
    return pts;
  };

  const double a_lo = -rp.alpha_L, a_hi = rp.alpha_H;
  const double sL = rp.n_L / rp.alpha_L, sH = rp.n_H / rp.alpha_H;
  auto core_width = [](double) { return kCoreWidth; };
  auto low_width = [&](double x) { return kTailGrowth * (sL + (a_lo - x)); };
  auto high_width = [&](double x) { return kTailGrowth * (sH + (x - a_hi)); };

  nodes_.clear();
  auto append = [&](const std::vector<double>& pts) {
    for (double p : pts)
      if (nodes_.empty() || p > nodes_.back()) nodes_.push_back(p);
  };

  // Left tail, marched outward from the transition and reversed.
  if (lo < a_lo) {
    auto pts = march(std::min(a_lo, hi), lo, low_width);
    std::reverse(pts.begin(), pts.end());
    append(pts);
  }
  const double c_lo = std::max(lo, a_lo), c_hi = std::min(hi, a_hi);
  if (c_lo < c_hi) append(march(c_lo, c_hi, core_width));
  if (hi > a_hi) append(march(std::max(a_hi, lo), hi, high_width));
  if (nodes_.size() < 2) nodes_ = {lo, hi};
}

void ResolutionConvolver::tabulate() {
  const std::size_t n = nodes_.size();
  left_exp_.assign(n, 0.0);
  right_exp_.assign(n, 0.0);
  left_bkg_.assign(n, 0.0);
  right_bkg_.assign(n, 0.0);
  left_osc_.assign(n, Complex{});
  right_osc_.assign(n, Complex{});
  const Rule& q = rule();

  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double a = nodes_[j], h = nodes_[j + 1] - a;
    double le = 0, lb = 0, re = 0, rb = 0;
    Complex lz{}, rz{};
    for (int i = 0; i < kOrder; ++i) {
      const double X = a + h * q.x[i];
      const double wr = q.w[i] * h * cb_.std_density(X);
      const double dl = a + h - X;  // distance to the right end
      const double dr = X - a;      // distance to the left end
      le += wr * std::exp(-k_exp_ * dl);
      lb += wr * std::exp(-k_bkg_ * dl);
      lz += wr * std::exp(-k_exp_ * dl) * std::polar(1.0, omega_ * dl);
      re += wr * std::exp(-k_exp_ * dr);
      rb += wr * std::exp(-k_bkg_ * dr);
      rz += wr * std::exp(-k_exp_ * dr) * std::polar(1.0, -omega_ * dr);
    }
    const double de = std::exp(-k_exp_ * h), db = std::exp(-k_bkg_ * h);
    const Complex dz = de * std::polar(1.0, omega_ * h);
    left_exp_[j + 1] = de * left_exp_[j] + le;
    left_bkg_[j + 1] = db * left_bkg_[j] + lb;
    left_osc_[j + 1] = dz * left_osc_[j] + lz;
    // Right sums are accumulated in a second pass; store panel pieces for now.
    right_exp_[j] = re;
    right_bkg_[j] = rb;
    right_osc_[j] = rz;
  }
  for (std::size_t j = n - 1; j-- > 0;) {
    const double h = nodes_[j + 1] - nodes_[j];
    const double de = std::exp(-k_exp_ * h), db = std::exp(-k_bkg_ * h);
    const Complex dz = de * std::polar(1.0, -omega_ * h);
    right_exp_[j] += de * right_exp_[j + 1];
    right_bkg_[j] += db * right_bkg_[j + 1];
    right_osc_[j] += dz * right_osc_[j + 1];
  }
}

ConvolvedBasis ResolutionConvolver::evaluate(double delta_t) const {
  if (!(delta_t >= t_lo_ && delta_t <= t_hi_)) {
    std::ostringstream os;
    os.precision(17);
    os << "delta_t = " << delta_t << " outside the tabulated range [" << t_lo_ << ", " << t_hi_ << "]";
    throw InvalidArgument(os.str());
  }
  const ResolutionParams& rp = cb_.params();
  const double z = (delta_t - rp.mu) / rp.sigma;
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), z);
  std::size_t j = static_cast<std::size_t>(std::distance(nodes_.begin(), it));
  j = std::clamp<std::size_t>(j, 1, nodes_.size() - 1) - 1;
  const double a = nodes_[j], b = nodes_[j + 1];
  const Rule& q = rule();

  // Partial panels [a, z] and [z, b].
  double le = 0, lb = 0, re = 0, rb = 0;
  Complex lz{}, rz{};
  const double hl = z - a, hr = b - z;
  for (int i = 0; i < kOrder; ++i) {
    if (hl > 0.0) {
      const double X = a + hl * q.x[i];
      const double wr = q.w[i] * hl * cb_.std_density(X);
      const double d = z - X;
      const double ee = std::exp(-k_exp_ * d);
      le += wr * ee;
      lb += wr * std::exp(-k_bkg_ * d);
      lz += wr * ee * std::polar(1.0, omega_ * d);
    }
    if (hr > 0.0) {
      const double X = z + hr * q.x[i];
      const double wr = q.w[i] * hr * cb_.std_density(X);
      const double d = X - z;
      const double ee = std::exp(-k_exp_ * d);
      re += wr * ee;
      rb += wr * std::exp(-k_bkg_ * d);
      rz += wr * ee * std::polar(1.0, -omega_ * d);
    }
  }
  const double del = std::exp(-k_exp_ * hl), dbl = std::exp(-k_bkg_ * hl);
  const double der = std::exp(-k_exp_ * hr), dbr = std::exp(-k_bkg_ * hr);
  const Complex left_z = del * std::polar(1.0, omega_ * hl) * left_osc_[j] + lz;
  const Complex right_z = der * std::polar(1.0, -omega_ * hr) * right_osc_[j + 1] + rz;
  const Complex osc = left_z + right_z;

  ConvolvedBasis out;
  out.exp = del * left_exp_[j] + le + der * right_exp_[j + 1] + re;
  out.bkg = dbl * left_bkg_[j] + lb + dbr * right_bkg_[j + 1] + rb;
  out.cos = osc.real();
  out.sin = osc.imag();
  return out;
}

}  // namespace wvamp
