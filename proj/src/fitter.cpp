#include "wvamp/fitter.hpp"

#include <Eigen/Dense>
#include <array>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "wvamp/errors.hpp"
#include "wvamp/nelder_mead.hpp"
#include "wvamp/random.hpp"

namespace wvamp {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kNuisanceBound = 5.0;  // in constraint widths
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kNewtonIter = 100;

// Standardized nuisance coordinates z = (value - nominal) / width.
struct Zs {
  double f = 0.0, mu = 0.0, sigma = 0.0;
};

class Problem {
 public:
  explicit Problem(const Likelihood& nll) : nll_(nll) {}

  NuisanceValues values(const Zs& z) const {
    const NuisanceValues& n = nll_.nominal();
    const ConstraintWidths& w = nll_.widths();
    return {n.f_phys + w.f_phys * z.f, n.mu + w.mu * z.mu, n.sigma + w.sigma * z.sigma};
  }

  bool in_bounds(const Zs& z) const {
    if (std::abs(z.f) > kNuisanceBound || std::abs(z.mu) > kNuisanceBound || std::abs(z.sigma) > kNuisanceBound)
      return false;
    const NuisanceValues v = values(z);
    return v.f_phys >= 0.0 && v.f_phys <= 1.0 && v.sigma > 0.0;
  }

  double operator()(double varphi, const Zs& z) const {
    if (!in_bounds(z)) return kInf;
    return nll_(varphi, values(z));
  }

  const Likelihood& nll() const { return nll_; }

 private:
  const Likelihood& nll_;
};

struct Point {
  double varphi = 0.0;
  Zs z;
  double f = kInf;
  bool converged = true;
  std::size_t iterations = 0;
};

SimplexOptions outer_opts(int max_evals) {
  SimplexOptions o;
  o.f_tol = 1e-7;
  o.x_tol = 1e-3;
  o.max_evals = max_evals;
  return o;
}

// Damped Newton over the free subset of (varphi, f_phys) at fixed resolution
// nuisances. The NLL is linear in f_phys and in (cos varphi, sin varphi) once
// the convolved basis is cached, so exact derivatives are cheap.
Point newton_fit(const Problem& p, double varphi0, const Zs& z0, bool free_phi, bool free_f, int max_iter) {
  const Likelihood& nll = p.nll();
  const double wf = nll.widths().f_phys;
  const double nom_f = nll.nominal().f_phys;
  const double f_lo = std::max(0.0, nom_f - kNuisanceBound * wf);
  const double f_hi = std::min(1.0, nom_f + kNuisanceBound * wf);
  Point cur;
  cur.varphi = varphi0;
  cur.z = z0;
  if (!p.in_bounds(z0)) {
    cur.converged = false;
    return cur;
  }
  NuisanceValues v = p.values(z0);
  cur.converged = false;
  for (int it = 0; it < max_iter; ++it) {
    const LocalExpansion e = nll.expand(cur.varphi, v);
    cur.f = e.value;
    cur.iterations = static_cast<std::size_t>(it + 1);
    double gp = free_phi ? e.d_phi : 0.0, gf = free_f ? e.d_f : 0.0;
    double hpp = free_phi ? e.d_phi_phi : 1.0, hff = free_f ? e.d_f_f : 1.0;
    double hpf = free_phi && free_f ? e.d_phi_f : 0.0;
    const double det = hpp * hff - hpf * hpf;
    double dp, df;
    if (hpp > 0.0 && det > 0.0) {
      dp = -(hff * gp - hpf * gf) / det;
      df = -(hpp * gf - hpf * gp) / det;
    } else {
      // Not locally convex: scaled gradient step.
      dp = -gp / std::max(std::abs(hpp), 1.0);
      df = -gf / std::max(std::abs(hff), 1.0 / (wf * wf));
    }
    const double decrement = -(gp * dp + gf * df);
    if (decrement < 1e-11 && std::abs(dp) < 1e-7) {
      cur.converged = true;
      break;
    }
    if (std::abs(dp) > 0.5) {
      df *= 0.5 / std::abs(dp);
      dp = std::copysign(0.5, dp);
    }
    double step = 1.0;
    bool moved = false;
    for (int k = 0; k < 40; ++k, step *= 0.5) {
      const double phi_t = cur.varphi + step * dp;
      const double f_t = std::clamp(v.f_phys + step * df, f_lo, f_hi);
      NuisanceValues vt = v;
      vt.f_phys = f_t;
      const double val = nll(phi_t, vt);
      if (val <= cur.f - 1e-4 * step * decrement || (val <= cur.f && step * std::abs(dp) < 1e-7)) {
        cur.varphi = phi_t;
        v = vt;
        cur.f = val;
        moved = true;
        break;
      }
    }
    if (!moved) {
      // No descent along the Newton direction: at the minimum to rounding.
      cur.converged = decrement < 1e-6;
      break;
    }
  }
  cur.z.f = (v.f_phys - nom_f) / wf;
  return cur;
}

Point inner_fit(const Problem& p, double mu_z, double sigma_z, double varphi0, double f0, int max_iter) {
  return newton_fit(p, varphi0, {f0, mu_z, sigma_z}, true, true, max_iter);
}

// Minimizes a smooth function of (z_mu, z_sigma) whose every evaluation is an
// inner fit. Newton steps on a central-difference quadratic model; a simplex
// search takes over if the model keeps failing to descend.
template <class Eval>
Point outer_minimize(Eval&& eval, double x0, double y0, int max_evals) {
  constexpr double h = 0.1;
  constexpr int kMaxIter = 30;
  Point best;
  std::size_t inner_iter = 0;
  int evals = 0;
  auto at = [&](double x, double y) {
    const Point q = eval(x, y, best);
    ++evals;
    inner_iter += q.iterations;
    if (q.f < best.f) best = q;
    return q.converged ? q.f : kInf;
  };
  double x = x0, y = y0;
  double fc = at(x, y);
  bool converged = false;
  for (int it = 0; it < kMaxIter && std::isfinite(fc); ++it) {
    const double fxp = at(x + h, y), fxm = at(x - h, y);
    const double fyp = at(x, y + h), fym = at(x, y - h);
    const double fxy = at(x + h, y + h);
    if (!std::isfinite(fxp + fxm + fyp + fym + fxy)) break;
    const double gx = (fxp - fxm) / (2 * h), gy = (fyp - fym) / (2 * h);
    const double hxx = (fxp - 2 * fc + fxm) / (h * h), hyy = (fyp - 2 * fc + fym) / (h * h);
    const double hxy = (fxy - fxp - fyp + fc) / (h * h);
    const double det = hxx * hyy - hxy * hxy;
    double sx, sy;
    if (hxx > 0.0 && det > 0.0) {
      sx = -(hyy * gx - hxy * gy) / det;
      sy = -(hxx * gy - hxy * gx) / det;
    } else {
      sx = -gx / std::max(std::abs(hxx), 1.0);
      sy = -gy / std::max(std::abs(hyy), 1.0);
    }
    const double len = std::hypot(sx, sy);
    if (len > 1.5) sx *= 1.5 / len, sy *= 1.5 / len;
    const double predicted = -(gx * sx + gy * sy);
    if (std::hypot(sx, sy) < 2e-3 && predicted < 1e-6) {
      converged = true;
      break;
    }
    bool moved = false;
    for (int k = 0; k < 6 && !moved; ++k, sx *= 0.5, sy *= 0.5) {
      const double ft = at(x + sx, y + sy);
      if (ft < fc) {
        x += sx;
        y += sy;
        fc = ft;
        moved = true;
      }
    }
    if (!moved) break;
  }
  if (!converged) {
    auto obj = [&](const std::vector<double>& v) { return at(v[0], v[1]); };
    const SimplexResult r = nelder_mead(obj, {best.z.mu, best.z.sigma}, {0.2, 0.2}, outer_opts(max_evals));
    converged = r.converged;
  }
  best.converged = converged && std::isfinite(best.f);
  best.iterations = inner_iter + static_cast<std::size_t>(evals);
  return best;
}

// Full minimization: (z_mu, z_sigma) outside, Newton over (varphi, z_f) inside.
Point nested_fit(const Problem& p, const Point& start, int max_evals) {
  Point warm = start;
  auto eval = [&](double mu_z, double sigma_z, const Point& best) {
    const Point& w = std::isfinite(best.f) ? best : warm;
    Point q;
    if (!p.in_bounds({w.z.f, mu_z, sigma_z})) return q;
    return inner_fit(p, mu_z, sigma_z, w.varphi, w.z.f, kNewtonIter);
  };
  return outer_minimize(eval, start.z.mu, start.z.sigma, max_evals);
}

Point stat_fit(const Problem& p, double varphi0, int max_iter) {
  return newton_fit(p, varphi0, Zs{}, true, false, max_iter);
}

// Profiled NLL at fixed varphi.
Point profile_at(const Problem& p, double varphi, const Zs& warm_start, int max_evals) {
  auto eval = [&](double mu_z, double sigma_z, const Point& best) {
    const double f0 = std::isfinite(best.f) ? best.z.f : warm_start.f;
    Point q;
    q.varphi = varphi;
    if (!p.in_bounds({f0, mu_z, sigma_z})) return q;
    return newton_fit(p, varphi, {f0, mu_z, sigma_z}, false, true, kNewtonIter);
  };
  return outer_minimize(eval, warm_start.mu, warm_start.sigma, max_evals);
}

}  // namespace

double wrap_angle(double a) {
  if (!std::isfinite(a)) return a;
  double w = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

Fitter::Fitter(const ObservableModel& model, const ConstraintWidths& widths, FitOptions options)
    : model_(model), widths_(widths), options_(options) {
  model_.validate();
  widths_.validate();
  if (options_.restarts < 0) throw InvalidArgument("restarts must be non-negative");
}

FitResult Fitter::minimize(const Dataset& data) const {
  const Likelihood nll(data, model_, widths_);
  const Problem p(nll);
  const int max_evals = options_.max_evals;
  Rng rng(stream_key({options_.seed, 0x5eedULL, data.experiment_id}));

  Point best;
  std::size_t iterations = 0;
  bool converged = false;
  if (!options_.float_nuisances) {
    best = stat_fit(p, options_.start_varphi, kNewtonIter);
    iterations += best.iterations;
    bool confirmed = options_.restarts == 0 && best.converged;
    for (int k = 0; k < options_.restarts; ++k) {
      const Point q = stat_fit(p, best.varphi + 0.6 * (rng.uniform() - 0.5), kNewtonIter);
      iterations += q.iterations;
      const double gain = best.f - q.f;
      if (gain > options_.tolerance) {
        best = q;
        confirmed = false;
      } else {
        confirmed = confirmed || (best.converged && q.converged);
        if (q.f < best.f) best = q;
      }
    }
    converged = confirmed;
  } else {
    Point start;
    start.varphi = options_.start_varphi;
    start.f = p(start.varphi, start.z);
    best = nested_fit(p, start, max_evals);
    iterations += best.iterations;
    bool confirmed = options_.restarts == 0 && best.converged;
    for (int k = 0; k < options_.restarts; ++k) {
      Point s = best;
      s.varphi += 0.6 * (rng.uniform() - 0.5);
      s.z.f += rng.uniform() - 0.5;
      s.z.mu += rng.uniform() - 0.5;
      s.z.sigma += rng.uniform() - 0.5;
      s.f = p(s.varphi, s.z);
      if (!std::isfinite(s.f)) s = best;
      const Point q = nested_fit(p, s, max_evals);
      iterations += q.iterations;
      const double gain = best.f - q.f;
      if (gain > options_.tolerance) {
        best = q;
        confirmed = false;
      } else {
        confirmed = confirmed || (best.converged && q.converged);
        if (q.f < best.f) best = q;
      }
    }
    converged = confirmed;
  }

  FitResult out;
  out.varphi_hat = wrap_angle(best.varphi);
  out.nll_min = best.f;
  out.converged = converged && std::isfinite(best.f);
  out.n_iterations = iterations;
  const NuisanceValues v = p.values(best.z);
  out.nuisances = {{"f_phys", nll.nominal().f_phys, widths_.f_phys, v.f_phys},
                   {"mu", nll.nominal().mu, widths_.mu, v.mu},
                   {"sigma", nll.nominal().sigma, widths_.sigma, v.sigma}};
  out.varphi_err_profile = std::numeric_limits<double>::quiet_NaN();
  out.varphi_err_hesse = std::numeric_limits<double>::quiet_NaN();
  if (options_.compute_hesse && out.converged) out.varphi_err_hesse = hesse_uncertainty(nll, out);
  if (options_.compute_profile && out.converged) out.varphi_err_profile = profile_uncertainty(nll, out);
  return out;
}

namespace {

Zs zs_from(const FitResult& fit) {
  Zs z;
  for (const NuisanceParam& n : fit.nuisances) {
    const double zz = (n.fitted - n.nominal) / n.constraint_width;
    if (n.name == "f_phys") z.f = zz;
    else if (n.name == "mu") z.mu = zz;
    else if (n.name == "sigma") z.sigma = zz;
  }
  return z;
}

}  // namespace

double crossing_distance(const std::function<double(double)>& excess, double first_step) {
  auto g = [&](double d) { return excess(d) - 0.5; };
  double lo = 0.0, glo = -0.5;
  double d = first_step;
  double gd = g(d);
  // Curvature-based first guess, then geometric expansion.
  if (gd < 0.0) {
    const double rise = gd + 0.5;
    if (rise > 1e-9) {
      lo = d;
      glo = gd;
      d = std::min(d * std::sqrt(0.5 / rise) * 1.1, kPi / 2.0);
      gd = g(d);
    }
    while (gd < 0.0) {
      if (d >= kPi / 2.0) throw NumericFailure("profile interval not bracketed within pi/2");
      lo = d;
      glo = gd;
      d = std::min(2.0 * d, kPi / 2.0);
      gd = g(d);
    }
  }
  boost::uintmax_t iters = 60;
  auto tol = [](double a, double b) { return std::abs(b - a) < 1e-4; };
  const auto root = boost::math::tools::toms748_solve(g, lo, d, glo, gd, tol, iters);
  return 0.5 * (root.first + root.second);
}

double Fitter::profile_uncertainty(const Likelihood& nll, const FitResult& fit) const {
  if (!fit.converged) throw InvalidArgument("profile uncertainty needs a converged fit");
  const Problem p(nll);
  const Zs z_hat = zs_from(fit);
  const int max_evals = options_.max_evals;

  auto profiled = [&](double varphi, Zs& warm) {
    if (!options_.float_nuisances) return p(varphi, Zs{});
    const Point q = profile_at(p, varphi, warm, max_evals);
    warm = q.z;
    return q.f;
  };
  // Reference minimum from the same profiling procedure to keep both sides consistent.
  Zs warm0 = z_hat;
  const double f_min = std::min(fit.nll_min, profiled(fit.varphi_hat, warm0));

  auto half_width = [&](double dir) {
    Zs warm = z_hat;
    try {
      return crossing_distance([&](double d) { return profiled(fit.varphi_hat + dir * d, warm) - f_min; });
    } catch (const NumericFailure& e) {
      throw NumericFailure(std::string(e.what()) + " on the " + (dir > 0 ? "upper" : "lower") + " side");
    }
  };
  return 0.5 * (half_width(+1.0) + half_width(-1.0));
}

double Fitter::hesse_uncertainty(const Likelihood& nll, const FitResult& fit) const {
  const Problem p(nll);
  const Zs z0 = zs_from(fit);
  const bool full = options_.float_nuisances;
  const int n = full ? 4 : 1;
  const std::array<double, 4> h{0.01, 0.05, 0.05, 0.05};
  auto f = [&](const std::array<double, 4>& dx) {
    return p(fit.varphi_hat + dx[0], {z0.f + dx[1], z0.mu + dx[2], z0.sigma + dx[3]});
  };
  const double f0 = f({0, 0, 0, 0});
  Eigen::MatrixXd H(n, n);
  for (int i = 0; i < n; ++i) {
    std::array<double, 4> e{};
    e[i] = h[i];
    std::array<double, 4> m{};
    m[i] = -h[i];
    H(i, i) = (f(e) - 2.0 * f0 + f(m)) / (h[i] * h[i]);
    for (int j = 0; j < i; ++j) {
      std::array<double, 4> pp{}, pm{}, mp{}, mm{};
      pp[i] = h[i], pp[j] = h[j];
      pm[i] = h[i], pm[j] = -h[j];
      mp[i] = -h[i], mp[j] = h[j];
      mm[i] = -h[i], mm[j] = -h[j];
      H(i, j) = H(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h[i] * h[j]);
    }
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::numeric_limits<double>::quiet_NaN();
  const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(n, n));
  return cov(0, 0) > 0.0 ? std::sqrt(cov(0, 0)) : std::numeric_limits<double>::quiet_NaN();
}

nlohmann::json to_json(const FitResult& r) {
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
  nlohmann::json j;
  j["varphi_hat"] = num(r.varphi_hat);
  j["varphi_hat_deg"] = num(r.varphi_hat / kPi * 180.0);
  j["varphi_err_profile"] = num(r.varphi_err_profile);
  j["varphi_err_profile_deg"] = num(r.varphi_err_profile / kPi * 180.0);
  j["varphi_err_hesse"] = num(r.varphi_err_hesse);
  j["nll_min"] = num(r.nll_min);
  j["converged"] = r.converged;
  j["n_iterations"] = r.n_iterations;
  nlohmann::json nus = nlohmann::json::array();
  for (const NuisanceParam& n : r.nuisances)
    nus.push_back({{"name", n.name},
                   {"nominal", n.nominal},
                   {"constraint_width", n.constraint_width},
                   {"fitted", num(n.fitted)}});
  j["nuisances"] = nus;
  return j;
}

}  // namespace wvamp
