// Acceptance run: one PASS/FAIL line per criterion with the measured values.
// Exit status is non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "wvamp/crystal_ball.hpp"
#include "wvamp/experiment_model.hpp"
#include "wvamp/lifetime.hpp"
#include "wvamp/postselection_map.hpp"
#include "wvamp/pseudoexp.hpp"
#include "wvamp/scan.hpp"

using namespace wvamp;
using oracle::kPi;

namespace {

constexpr double kDeg = kPi / 180.0;
constexpr double kTau = 1.519;
constexpr double kDm = 0.506;
constexpr double kPhi = 44.4 * kDeg;

// Tolerances.
constexpr double kAmpTarget = 2.6, kAmpTol = 0.05, kAmpArgTarget = 0.2, kAmpArgTol = 0.05;
constexpr double kMcSigmas = 3.0;
constexpr double kYieldTarget = 3200.0, kYieldRelTol = 0.03;
constexpr double kNormTol = 1e-8, kNTol = 1e-9;
constexpr double kFirstOrderTol = 1e-3, kScalingFactor = 1.5;
constexpr double kContinuityTol = 1e-12, kKernelNormTol = 1e-10;
constexpr double kPullMeanTol = 0.2, kPullWidthTol = 0.15, kStatLo = 3.4 * kDeg, kStatHi = 9.7 * kDeg;
constexpr double kGainTarget = 0.20, kGainTol = 0.08;
constexpr double kRoundTripTol = 1e-10;

unsigned threads() { return std::max(1u, std::thread::hardware_concurrency()); }

MesonParams meson(double tau = kTau, double dm = kDm) { return MesonParams::from_averages(0.0, 1.0 / tau, dm); }
MixingParams mixing(double phi = kPhi) { return MixingParams::from_polar(std::sqrt(0.5), phi); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run(int id, const char* title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  const Outcome o = body();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s criterion %d (%s): %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0, double e = 0) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a, b, c, d, e);
  return buf;
}

Outcome lifetime_amplification() {
  // The maximum lies on the branch Im A_w = -|A_w|, which is theta = varphi + pi/2 in this phase convention.
  double best = 0.0, arg = 0.0;
  for (int i = 1; i < 1000; ++i) {
    const double r = i / 1000.0;
    const double ratio =
        effective_lifetime(Postselection::from_polar(r, kPhi + kPi / 2), Flavor::B0, meson(), mixing()).amplification_ratio;
    if (ratio > best) best = ratio, arg = r;
  }
  return {std::abs(best - kAmpTarget) <= kAmpTol && std::abs(arg - kAmpArgTarget) <= kAmpArgTol,
          fmt("max tau_eff/tau = %.4f at |r| = %.3f", best, arg)};
}

Outcome monte_carlo_lifetime() {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    SignalParams sp;
    sp.abs_r = 0.05 + 0.9 * u(gen);
    sp.theta = 2 * kPi * (u(gen) - 0.5);
    // Positive times of the B0-tagged signal density are the postselected decay density.
    const PhysicsSampler sampler(sp, Flavor::B0, 0.0);
    Rng rng(stream_key({2, static_cast<std::uint64_t>(k)}));
    std::vector<double> t;
    t.reserve(1000000);
    while (t.size() < 1000000) {
      const double x = sampler.sample(rng);
      if (x > 0.0) t.push_back(x);
    }
    const oracle::Moments m = oracle::moments(t);
    const double closed =
        effective_lifetime(Postselection::from_polar(sp.abs_r, sp.theta), Flavor::B0, meson(), mixing()).tau_eff;
    worst = std::max(worst, std::abs(m.mean - closed) / m.stderr_mean);
  }
  return {worst < kMcSigmas, fmt("largest deviation %.2f standard errors over 10 settings", worst)};
}

Outcome yield() {
  const double n = expected_yield(DetectorConfig{});
  return {std::abs(n - kYieldTarget) <= kYieldRelTol * kYieldTarget, fmt("expected yield %.1f", n)};
}

Outcome normalizations() {
  std::mt19937_64 gen(4);
  double cond = 0.0, sig = 0.0, nrel = 0.0;
  for (int k = 0; k < 100; ++k) {
    const SignalParams sp = fixture::random_signal(gen);
    const MesonParams mp = meson(sp.tau, sp.delta_m);
    const MixingParams mix = mixing(sp.varphi);
    const Postselection post = Postselection::from_polar(sp.abs_r, sp.theta);
    for (Flavor f : {Flavor::B0, Flavor::B0bar}) {
      const double a = oracle::integrate_decay(
          [&](double t) { return conditional_pdf_equalwidth(t, post, f, mp, mix); }, sp.tau);
      cond = std::max(cond, std::abs(a - 1.0));
      const double b = fixture::integrate_two_sided([&](double t) { return signal_pdf(t, f, sp); }, sp.tau);
      sig = std::max(sig, std::abs(b - 1.0));
    }
    const double quad = fixture::integrate_two_sided(
        [&](double t) {
          return 0.5 * std::exp(-std::abs(t) / sp.tau) * (1.0 + (2 * sp.abs_r * sp.abs_r - 1.0) * std::cos(sp.delta_m * t));
        },
        sp.tau);
    nrel = std::max(nrel, std::abs(signal_normalization(sp) - quad) / quad);
  }
  return {cond < kNormTol && sig < kNormTol && nrel < kNTol,
          fmt("max |area - 1|: conditional %.2e, signal %.2e; N relative error %.2e", cond, sig, nrel)};
}

Outcome first_order() {
  // Representative postselection |r| = 0.5, theta = 0.
  const Postselection post = Postselection::from_polar(0.5, 0.0);
  const double gamma = 1.0 / kTau;
  auto error = [&](double x) {
    const MesonParams mp = MesonParams::from_averages(0.0, gamma, x * gamma);
    const double exact = effective_lifetime(post, Flavor::B0, mp, mixing()).tau_eff;
    return std::abs(effective_lifetime_first_order(post, Flavor::B0, mp, mixing()) - exact) / exact;
  };
  const double e = error(0.01);
  const double ratio = error(0.01) / error(0.001);
  return {e < kFirstOrderTol && ratio > 100.0 / kScalingFactor && ratio < 100.0 * kScalingFactor,
          fmt("relative error %.2e at dm/Gamma = 0.01; error ratio over 0.001..0.01 = %.1f", e, ratio)};
}

Outcome resolution_function() {
  std::mt19937_64 gen(6);
  double jump = 0.0, norm = 0.0;
  for (int k = 0; k < 50; ++k) {
    const ResolutionParams rp = fixture::random_resolution(gen);
    const CrystalBall cb(rp);
    for (double edge : {rp.mu - rp.alpha_L * rp.sigma, rp.mu + rp.alpha_H * rp.sigma})
      jump = std::max(jump, std::abs(cb.density(std::nextafter(edge, -1e9)) - cb.density(std::nextafter(edge, 1e9))));
    norm = std::max(norm, std::abs(fixture::kernel_area(cb) - 1.0));
  }
  return {jump < kContinuityTol && norm < kKernelNormTol,
          fmt("max jump at transitions %.2e, max |area - 1| %.2e", jump, norm)};
}

Outcome fit_closure() {
  EnsembleConfig ec;
  ec.n_experiments = 200;
  ec.events_per_experiment = 3200;
  ec.seed = 7;
  ScanOptions opt;
  opt.fit.compute_profile = true;
  opt.threads = threads();
  const ScanPoint pt = scan_point(ec, opt);
  std::vector<double> pulls;
  for (const PointFit& f : pt.fits)
    if (!f.failed && std::isfinite(f.err_profile)) pulls.push_back(wrap_angle(f.varphi_full - kPhi) / f.err_profile);
  const oracle::Moments m = oracle::moments(pulls);
  const bool pass = pt.n_failed == 0 && std::abs(m.mean) <= kPullMeanTol && std::abs(m.stddev - 1.0) <= kPullWidthTol &&
                    pt.err_stat >= kStatLo && pt.err_stat <= kStatHi;
  return {pass, fmt("pull mean %.3f, pull width %.3f, stat spread %.2f deg, %.0f failed", m.mean, m.stddev,
                    pt.err_stat / kDeg, static_cast<double>(pt.n_failed))};
}

Outcome precision_improvement() {
  ScanOptions opt;
  opt.fit.compute_profile = false;
  opt.threads = threads();
  auto at = [&](double r, double theta, std::size_t n, bool hesse) {
    EnsembleConfig ec;
    ec.n_experiments = n;
    ec.seed = 8;  // common random numbers across points
    ec.model.signal.abs_r = r;
    ec.model.signal.theta = theta;
    ScanOptions o = opt;
    o.fit.compute_hesse = hesse;
    return scan_point(ec, o);
  };
  const ScanPoint p5 = at(0.5, 0.0, 200, false), p7 = at(0.7, 0.0, 200, false);
  const double gain = 1.0 - p5.err_total / p7.err_total;

  // Variation of the expected uncertainty along each axis of the grid.
  const GridSpec grid = GridSpec::standard();
  auto range = [](const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()) - *std::min_element(v.begin(), v.end()); };
  std::vector<double> vs_theta, vs_r;
  for (double th : grid.theta) vs_theta.push_back(at(0.5, th, 30, true).mean_err_hesse);
  for (double r : grid.abs_r) vs_r.push_back(at(r, 0.0, 30, true).mean_err_hesse);
  const double dth = range(vs_theta), dr = range(vs_r);
  const bool pass = std::abs(gain - kGainTarget) <= kGainTol && dth < 0.5 * dr && p5.n_failed == 0 && p7.n_failed == 0;
  return {pass, fmt("total %.2f deg at |r| = 0.5 vs %.2f deg at 0.7 (gain %.1f%%); variation vs theta %.2f deg, vs |r| %.2f deg",
                    p5.err_total / kDeg, p7.err_total / kDeg, 100 * gain, dth / kDeg, dr / kDeg)};
}

Outcome round_trip() {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto phase = [&] { return std::polar(1.0, 2 * kPi * u(gen)); };
  const MesonParams mp = meson();
  const MixingParams mix = mixing();
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double a = std::sqrt(u(gen)), b = std::sqrt(u(gen));
    const DecayModeSpec mode(a * phase(), std::sqrt(1 - a * a) * phase(), b * phase(), std::sqrt(1 - b * b) * phase());
    const Postselection post = postselection_from_mode(mode);
    const DecayAmplitudes amp = amplitudes_from_mode(mode, phase());
    double lo = 1e300, hi = 0.0;
    for (double t = 0.0; t <= 10.0; t += 0.1) {
      const EvolvedState e = evolve(Flavor::B0, t, mp, mix);
      const double ratio = std::norm(amp.a_f * e.a + amp.a_f_bar * e.b) / transition_probability(post, Flavor::B0, t, mp, mix);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    worst = std::max(worst, (hi - lo) / hi);
  }
  return {worst < kRoundTripTol, fmt("largest relative spread of the proportionality constant %.2e", worst)};
}

}  // namespace

int main() {
  run(1, "lifetime amplification", lifetime_amplification);
  run(2, "closed-form vs Monte Carlo lifetime", monte_carlo_lifetime);
  run(3, "yield chain", yield);
  run(4, "normalizations", normalizations);
  run(5, "first-order lifetime", first_order);
  run(6, "resolution function", resolution_function);
  run(7, "fit closure", fit_closure);
  run(8, "precision improvement", precision_improvement);
  run(9, "postselection round trip", round_trip);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
