#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "wvamp/errors.hpp"
#include "wvamp/lifetime.hpp"
#include "wvamp/random.hpp"

using namespace wvamp;
using oracle::kPi;

namespace {

const double kTau = 1.519;
const double kDm = 0.506;
const double kGamma = 1.0 / kTau;
const double kPhi = 44.4 * kPi / 180;

MesonParams bd(double delta_gamma = 0.0) { return MesonParams::from_averages(0.0, kGamma, kDm, delta_gamma); }
MixingParams equal_mix(double phi = kPhi) { return MixingParams::from_polar(std::sqrt(0.5), phi); }

}  // namespace

TEST_CASE("unselected density") {
  const MesonParams mp = bd();
  for (double t : {0.0, 0.7, 3.0})
    CHECK(pdf_unselected(t, mp, equal_mix()) == doctest::Approx(kGamma * std::exp(-kGamma * t)).epsilon(1e-13));

  const MesonParams mg = bd(0.05);
  const MixingParams mix = MixingParams::from_polar(0.6, 0.3);
  for (Flavor f : {Flavor::B0, Flavor::B0bar}) {
    for (double t = 0.1; t < 8.0; t += 0.37) {
      const double h = 1e-5;
      const double fd = -(survival_probability(f, t + h, mg, mix) - survival_probability(f, t - h, mg, mix)) / (2 * h);
      CHECK(std::abs(pdf_unselected(t, mg, mix, f) - fd) < 1e-6);
    }
    const double area = oracle::integrate_decay([&](double t) { return pdf_unselected(t, mg, mix, f); }, kTau);
    CHECK(std::abs(area - 1.0) < 1e-8);
  }
}

TEST_CASE("unselected lifetime") {
  CHECK(lifetime_unselected(bd(), equal_mix()).tau_eff == doctest::Approx(kTau).epsilon(1e-14));
  for (double abs_p : {0.6, 0.8}) {
    const MesonParams mp = bd(0.04);
    const MixingParams mix = MixingParams::from_polar(abs_p, -0.4);
    for (Flavor f : {Flavor::B0, Flavor::B0bar}) {
      const double ref = oracle::integrate_decay([&](double t) { return t * pdf_unselected(t, mp, mix, f); }, kTau);
      CHECK(std::abs(lifetime_unselected(mp, mix, f).tau_eff - ref) / ref < 1e-8);
    }
  }
}

TEST_CASE("conditional densities") {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 30; ++k) {
    const Postselection post = Postselection::from_polar(0.05 + 0.9 * u(gen), 2 * kPi * (u(gen) - 0.5));
    const MesonParams mg = bd(0.1 * (u(gen) - 0.5));
    const MixingParams mix = MixingParams::from_polar(0.3 + 0.5 * u(gen), 2 * kPi * (u(gen) - 0.5));
    for (Flavor f : {Flavor::B0, Flavor::B0bar}) {
      const double quad =
          oracle::integrate_decay([&](double t) { return transition_probability(post, f, t, mg, mix); }, kTau);
      CHECK(std::abs(conditional_normalization(post, f, mg, mix) - quad) < 1e-9);
      const double area =
          oracle::integrate_decay([&](double t) { return conditional_pdf_exact(t, post, f, mg, mix); }, kTau);
      CHECK(std::abs(area - 1.0) < 1e-8);
      const double m1 = oracle::integrate_decay(
          [&](double t) { return t * transition_probability(post, f, t, mg, mix); }, kTau);
      CHECK(std::abs(conditional_first_moment(post, f, mg, mix) - m1) < 1e-9);
    }
    // Equal widths: the two forms coincide pointwise.
    const MesonParams mp = bd();
    for (Flavor f : {Flavor::B0, Flavor::B0bar})
      for (double t : {0.0, 0.8, 2.5, 7.0})
        CHECK(std::abs(conditional_pdf_equalwidth(t, post, f, mp, mix) - conditional_pdf_exact(t, post, f, mp, mix)) <
              1e-10);
  }

  // |r| = 1/sqrt2 and theta = varphi: pure exponential.
  const Postselection aligned = Postselection::from_polar(std::sqrt(0.5), kPhi);
  for (double t : {0.0, 1.0, 4.0})
    CHECK(conditional_pdf_equalwidth(t, aligned, Flavor::B0, bd(), equal_mix()) ==
          doctest::Approx(kGamma * std::exp(-kGamma * t)).epsilon(1e-13));

  // Small |r| pushes the density to later times than large |r|.
  auto mean = [&](double r) {
    const Postselection p = Postselection::from_polar(r, 0.0);
    return oracle::integrate_decay([&](double t) { return t * conditional_pdf_equalwidth(t, p, Flavor::B0, bd(), equal_mix()); },
                                   kTau);
  };
  CHECK(mean(0.1) > mean(0.9));
}

TEST_CASE("effective lifetime") {
  const MesonParams mp = bd();
  const Postselection aligned = Postselection::from_polar(std::sqrt(0.5), kPhi);
  CHECK(effective_lifetime(aligned, Flavor::B0, mp, equal_mix()).tau_eff == doctest::Approx(kTau).epsilon(1e-13));
  CHECK_THROWS_AS(effective_lifetime(Postselection(Complex{}, Complex{1.0}), Flavor::B0, mp, equal_mix()),
                  SingularPostselection);

  // |r| = 1 makes A_w vanish; compare with the quadrature first moment.
  const Postselection pure = Postselection::from_polar(1.0, 0.3);
  const double m1 = oracle::integrate_decay(
      [&](double t) { return t * conditional_pdf_equalwidth(t, pure, Flavor::B0, mp, equal_mix()); }, kTau);
  CHECK(std::abs(effective_lifetime(pure, Flavor::B0, mp, equal_mix()).tau_eff - m1) < 1e-9);

  // The weak-value form agrees with the ratio of closed-form moments.
  std::mt19937_64 gen(22);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const Postselection post = Postselection::from_polar(0.02 + 0.97 * u(gen), 2 * kPi * (u(gen) - 0.5));
    const MixingParams mix = equal_mix(2 * kPi * (u(gen) - 0.5));
    for (Flavor f : {Flavor::B0, Flavor::B0bar})
      CHECK(effective_lifetime(post, f, mp, mix).tau_eff ==
            doctest::Approx(conditional_mean_lifetime(post, f, mp, mix).tau_eff).epsilon(1e-12));
  }

  // Amplification over |r| on the branch Im A_w = -|A_w|.
  double best = 0.0, best_r = 0.0;
  for (double r = 0.005; r < 1.0; r += 0.005) {
    const double ratio =
        effective_lifetime(Postselection::from_polar(r, kPhi + kPi / 2), Flavor::B0, mp, equal_mix()).amplification_ratio;
    if (ratio > best) best = ratio, best_r = r;
  }
  CHECK(best == doctest::Approx(2.6).epsilon(0.05 / 2.6));
  CHECK(std::abs(best_r - 0.2) < 0.05);
}

TEST_CASE("lifetime depends on sin(theta - varphi) only at fixed |r|") {
  const MesonParams mp = bd();
  for (double rel : {0.3, 1.1, -0.7}) {
    const double a = effective_lifetime(Postselection::from_polar(0.4, kPhi + rel), Flavor::B0, mp, equal_mix()).tau_eff;
    const double b =
        effective_lifetime(Postselection::from_polar(0.4, kPhi + kPi - rel), Flavor::B0, mp, equal_mix()).tau_eff;
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("orthonormal pair recovers the unselected lifetime") {
  const MesonParams mp = bd();
  const MixingParams mix = equal_mix();
  const Postselection post = Postselection::from_polar(0.37, 1.2);
  double num = 0.0, den = 0.0;
  for (const Postselection& p : {post, post.orthogonal()}) {
    const double w = conditional_normalization(p, Flavor::B0, mp, mix);
    num += w * effective_lifetime(p, Flavor::B0, mp, mix).tau_eff;
    den += w;
  }
  CHECK(std::abs(num / den - lifetime_unselected(mp, mix).tau_eff) < 1e-8);
}

TEST_CASE("first-order lifetime") {
  const Postselection real_aw = Postselection::from_polar(0.4, kPhi);
  CHECK(effective_lifetime_first_order(real_aw, Flavor::B0, bd(), equal_mix()) == doctest::Approx(kTau).epsilon(1e-14));

  // The second-order coefficient nearly vanishes around theta - varphi = 1, so
  // take a point where the quadratic term dominates.
  const Postselection post = Postselection::from_polar(0.5, kPhi + 0.5);
  auto error = [&](double x) {
    const MesonParams mp = MesonParams::from_averages(0.0, kGamma, x * kGamma);
    const double exact = effective_lifetime(post, Flavor::B0, mp, equal_mix()).tau_eff;
    return std::abs(effective_lifetime_first_order(post, Flavor::B0, mp, equal_mix()) - exact) / exact;
  };
  CHECK(error(0.01) < 1e-3);
  CHECK(error(0.01) / error(0.005) == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("CP difference") {
  const MesonParams mp = bd();
  const Postselection post = Postselection::from_polar(0.4, 0.2);
  for (double t : {0.3, 1.5, 4.0}) CHECK(std::abs(cp_difference(t, post, mp, equal_mix(0.0))) < 1e-15);
  CHECK(cp_difference(kTau, post, mp, equal_mix(0.5)) == doctest::Approx(-cp_difference(kTau, post, mp, equal_mix(-0.5))));
  CHECK_THROWS_AS(cp_difference(1.0, post, mp, MixingParams::from_polar(0.6, 0.2)), InvalidArgument);

  // Before normalization the difference, divided by |<phi|B0>|^2 = |r|^2, is exactly
  // 2 (sqrt(1 - |r|^2)/|r|) cos(theta) sin(varphi) e^{-Gamma t} sin(dm t).
  const MesonParams slow = MesonParams::from_averages(0.0, kGamma, 0.05 * kGamma);
  const MixingParams mix = equal_mix(0.6);
  for (const MesonParams& m : {mp, slow}) {
    for (double t : {0.5, 2.0, 4.0}) {
      const double r = post.abs_r();
      const double shape = 2.0 * std::sqrt(1 - r * r) / r * std::cos(post.theta()) * std::sin(mix.varphi()) *
                           std::exp(-kGamma * t) * std::sin(m.delta_m() * t);
      const double raw =
          transition_probability(post, Flavor::B0, t, m, mix) - transition_probability(post, Flavor::B0bar, t, m, mix);
      CHECK(std::abs(raw / (r * r) - shape) < 1e-14);
    }
  }

  // theta = pi/2 removes the leading term.
  const Postselection ortho = Postselection::from_polar(0.4, kPi / 2);
  CHECK(std::abs(cp_difference(kTau, ortho, slow, mix)) < 0.1 * std::abs(cp_difference(kTau, post, slow, mix)));
}

TEST_CASE("Monte Carlo mean of the conditional density") {
  // Accept-reject under e^{-Gamma t}; the bracket is bounded by 1 + |cos| + |sin| coefficient norm.
  const MesonParams mp = bd();
  const MixingParams mix = equal_mix();
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 3; ++k) {
    const Postselection post = Postselection::from_polar(0.1 + 0.8 * u(gen), 2 * kPi * (u(gen) - 0.5));
    const double peak = conditional_pdf_equalwidth(0.0, post, Flavor::B0, mp, mix);
    double bound = 0.0;
    for (double t = 0.0; t < 2 * kPi / kDm; t += 0.001)
      bound = std::max(bound, conditional_pdf_equalwidth(t, post, Flavor::B0, mp, mix) * std::exp(kGamma * t));
    bound = std::max(bound * 1.01, peak);
    Rng rng(stream_key({23, static_cast<std::uint64_t>(k)}));
    std::vector<double> x;
    while (x.size() < 200000) {
      const double t = rng.exponential() / kGamma;
      if (rng.uniform() * bound < conditional_pdf_equalwidth(t, post, Flavor::B0, mp, mix) * std::exp(kGamma * t))
        x.push_back(t);
    }
    const oracle::Moments m = oracle::moments(x);
    CHECK(std::abs(m.mean - effective_lifetime(post, Flavor::B0, mp, mix).tau_eff) < 3.5 * m.stderr_mean);
  }
}
