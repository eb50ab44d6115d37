#include "wvamp/scan.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>

#include "wvamp/errors.hpp"

namespace wvamp {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt17(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double mean_finite(const std::vector<double>& v) {
  double s = 0.0;
  std::size_t n = 0;
  for (double x : v)
    if (std::isfinite(x)) {
      s += x;
      ++n;
    }
  return n ? s / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

GridSpec GridSpec::standard() {
  GridSpec g;
  for (int i = 1; i <= 9; ++i) g.abs_r.push_back(0.1 * i);
  for (int k = -5; k <= 5; ++k) g.theta.push_back(36.0 * k * kPi / 180.0);
  return g;
}

void GridSpec::validate() const {
  if (abs_r.empty() || theta.empty()) throw InvalidArgument("scan grid must not be empty");
  for (double r : abs_r)
    if (!(r > 0.0 && r < 1.0)) throw InvalidArgument("scan |r| values must lie in (0, 1)");
  for (double t : theta)
    if (!std::isfinite(t)) throw InvalidArgument("scan theta values must be finite");
}

double angular_spread(const std::vector<double>& values, double reference) {
  if (values.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> d;
  d.reserve(values.size());
  for (double v : values) d.push_back(wrap_angle(v - reference));
  double mean = 0.0;
  for (double x : d) mean += x;
  mean /= static_cast<double>(d.size());
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(d.size() - 1));
}

ScanPoint scan_point(const EnsembleConfig& config, const ScanOptions& options) {
  config.validate();
  FitOptions full = options.fit;
  full.float_nuisances = true;
  full.start_varphi = config.model.signal.varphi;
  FitOptions stat = full;
  stat.float_nuisances = false;
  stat.compute_profile = false;
  stat.compute_hesse = false;
  const Fitter full_fitter(config.model, options.widths, full);
  const Fitter stat_fitter(config.model, options.widths, stat);

  ScanPoint pt;
  pt.abs_r = config.model.signal.abs_r;
  pt.theta = config.model.signal.theta;
  pt.n_experiments = config.n_experiments;
  pt.fits.resize(config.n_experiments);
  parallel_for(config.n_experiments, options.threads, [&](std::size_t i) {
    PointFit& pf = pt.fits[i];
    try {
      const Dataset d = run_experiment(config, static_cast<std::uint32_t>(i));
      const FitResult a = full_fitter.minimize(d);
      const FitResult b = stat_fitter.minimize(d);
      pf.varphi_full = a.varphi_hat;
      pf.varphi_stat = b.varphi_hat;
      pf.err_hesse = a.varphi_err_hesse;
      pf.err_profile = a.varphi_err_profile;
      pf.failed = !a.converged || !b.converged;
    } catch (const Error&) {
      pf.failed = true;
    }
  });

  std::vector<double> full_vals, stat_vals, hesse, profile;
  for (const PointFit& pf : pt.fits) {
    if (pf.failed) {
      ++pt.n_failed;
      continue;
    }
    full_vals.push_back(pf.varphi_full);
    stat_vals.push_back(pf.varphi_stat);
    hesse.push_back(pf.err_hesse);
    profile.push_back(pf.err_profile);
  }
  const double truth = config.model.signal.varphi;
  pt.err_total = angular_spread(full_vals, truth);
  pt.err_stat = angular_spread(stat_vals, truth);
  pt.err_syst = std::sqrt(std::max(0.0, pt.err_total * pt.err_total - pt.err_stat * pt.err_stat));
  pt.mean_err_hesse = mean_finite(hesse);
  pt.mean_err_profile = mean_finite(profile);
  pt.flagged = static_cast<double>(pt.n_failed) > options.max_failure_fraction * static_cast<double>(pt.n_experiments);
  return pt;
}

ScanResult scan(const GridSpec& grid, const EnsembleConfig& config, const ScanOptions& options) {
  grid.validate();
  ScanResult out;
  for (double r : grid.abs_r) {
    for (double th : grid.theta) {
      EnsembleConfig c = config;
      c.model.signal.abs_r = r;
      c.model.signal.theta = th;
      out.points.push_back(scan_point(c, options));
    }
  }
  return out;
}

void write_scan_csv(std::ostream& os, const ScanResult& result) {
  const double deg = 180.0 / kPi;
  os << "abs_r,theta_deg,err_total_deg,err_stat_deg,err_syst_deg,n_failed\n";
  for (const ScanPoint& p : result.points) {
    os << fmt17(p.abs_r) << ',' << fmt17(p.theta * deg) << ',' << fmt17(p.err_total * deg) << ','
       << fmt17(p.err_stat * deg) << ',' << fmt17(p.err_syst * deg) << ',' << p.n_failed << '\n';
  }
}

}  // namespace wvamp
