#pragma once

// Random parameter draws and reference integrals shared by the unit tests and
// the acceptance run.

#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "wvamp/crystal_ball.hpp"
#include "wvamp/experiment_model.hpp"

namespace fixture {

using namespace wvamp;
using oracle::kPi;

inline SignalParams random_signal(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SignalParams sp;
  sp.tau = 0.5 + 2.0 * u(gen);
  sp.delta_m = 0.1 + u(gen);
  sp.abs_r = u(gen);
  sp.theta = 2 * kPi * (u(gen) - 0.5);
  sp.varphi = 2 * kPi * (u(gen) - 0.5);
  return sp;
}

inline ResolutionParams random_resolution(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ResolutionParams rp;
  rp.mu = 0.2 * (u(gen) - 0.5);
  rp.sigma = 0.2 + 1.5 * u(gen);
  rp.alpha_L = 0.3 + 2.5 * u(gen);
  rp.alpha_H = 0.3 + 2.5 * u(gen);
  rp.n_L = 1.5 + 8.0 * u(gen);
  rp.n_H = 1.5 + 8.0 * u(gen);
  return rp;
}

// Two-sided integral over +-40 tau in unit-tau panels.
template <class F>
double integrate_two_sided(F f, double scale) {
  return oracle::integrate_decay(f, scale) + oracle::integrate_decay([&](double t) { return f(-t); }, scale);
}

// Integral of a crystal-ball density over the real line: tails to infinity by exp-sinh.
inline double kernel_area(const CrystalBall& cb) {
  const ResolutionParams& rp = cb.params();
  boost::math::quadrature::exp_sinh<double> tail;
  const double lo = -rp.alpha_L, hi = rp.alpha_H;
  const double core = oracle::integrate([&](double x) { return cb.std_density(x); }, lo, hi);
  const double left = tail.integrate([&](double u) { return cb.std_density(lo - u); }, 1e-14);
  const double right = tail.integrate([&](double u) { return cb.std_density(hi + u); }, 1e-14);
  return core + left + right;
}

}  // namespace fixture
