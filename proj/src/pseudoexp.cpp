#include "wvamp/pseudoexp.hpp"

#include <atomic>
#include <cmath>
#include <algorithm>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "wvamp/errors.hpp"

namespace wvamp {

namespace {

constexpr std::uint64_t kPoissonStream = 0x706f6973ULL;

}  // namespace

void EnsembleConfig::validate() const {
  if (n_experiments < 1) throw InvalidArgument("n_experiments must be at least 1");
  if (!(b0_fraction >= 0.0 && b0_fraction <= 1.0)) throw InvalidArgument("b0_fraction must lie in [0, 1]");
  if (yield_mode == YieldMode::Poisson && !(poisson_mean >= 0.0 && std::isfinite(poisson_mean)))
    throw InvalidArgument("poisson_mean must be finite and non-negative");
  model.validate();
}

PhysicsSampler::PhysicsSampler(const SignalParams& sp, Flavor tag, double wrong_tag)
    : sp_(sp), shape_(signal_shape(tag, sp, wrong_tag)) {
  const double tau = sp.tau;
  const double amp = std::hypot(shape_.cos_coef, shape_.sin_coef);
  const double dm = std::abs(sp.delta_m);

  // For each candidate envelope scale lambda, bound e^{-|t|(1/tau - 1/lambda)} b(t)
  // by its maximum on a grid plus a Lipschitz allowance.
  const double candidates[] = {1.0, 1.25, 1.5, 2.0, 2.5, 3.0};
  for (double c : candidates) {
    const double lambda = c * tau;
    const double a = 1.0 / tau - 1.0 / lambda;
    double bound;
    if (a == 0.0) {
      bound = 1.0 + amp;
    } else {
      const double span = 60.0 * tau;
      const double step = 0.005 * tau;
      double grid_max = 0.0;
      for (double t = 0.0; t <= span; t += step) {
        const double env = std::exp(-a * t);
        grid_max = std::max({grid_max, env * bracket(t), env * bracket(-t)});
      }
      const double lipschitz = 2.0 * a + amp * dm;
      bound = std::max(grid_max + 0.5 * lipschitz * step, 2.0 * std::exp(-a * span));
    }
    const double eff = shape_.norm / (bound * lambda);
    if (eff > efficiency_) {
      efficiency_ = eff;
      lambda_ = lambda;
      bound_ = bound;
    }
  }
  if (!(bound_ > 0.0) || !std::isfinite(bound_)) throw NumericFailure("sampling envelope could not be constructed");
}

double PhysicsSampler::bracket(double t) const {
  const double x = sp_.delta_m * t;
  return 1.0 + shape_.cos_coef * std::cos(x) + shape_.sin_coef * std::sin(x);
}

double PhysicsSampler::sample(Rng& rng) const {
  const double a = 1.0 / sp_.tau - 1.0 / lambda_;
  for (;;) {
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const double t = sign * lambda_ * rng.exponential();
    const double target = std::exp(-a * std::abs(t)) * bracket(t);
    if (rng.uniform() * bound_ <= target) return t;
  }
}

std::vector<Event> sample_events(std::size_t n, double b0_fraction, const ObservableModel& model,
                                 std::uint64_t seed, std::uint32_t experiment) {
  model.validate();
  if (!(b0_fraction >= 0.0 && b0_fraction <= 1.0)) throw InvalidArgument("b0_fraction must lie in [0, 1]");
  std::vector<Event> out;
  if (n == 0) return out;
  out.reserve(n);

  const double w = model.detector.effective_wrong_tag();
  const double f = model.detector.f_phys;
  const double tau_b = model.background.tau_bkg;
  const CrystalBall cb(model.resolution);
  const std::size_t n_b0 = static_cast<std::size_t>(std::llround(static_cast<double>(n) * b0_fraction));

  for (Flavor tag : {Flavor::B0, Flavor::B0bar}) {
    const std::size_t count = tag == Flavor::B0 ? n_b0 : n - n_b0;
    if (count == 0) continue;
    const PhysicsSampler sampler(model.signal, tag, w);
    const std::uint64_t tag_id = tag == Flavor::B0 ? 0 : 1;
    for (std::size_t i = 0; i < count; ++i) {
      Rng rng(stream_key({seed, experiment, tag_id, i}));
      double t;
      if (rng.uniform() < f) {
        t = sampler.sample(rng);
      } else {
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        t = sign * tau_b * rng.exponential();
      }
      const double x = cb.quantile(rng.uniform_open());
      out.push_back({t + x, tag});
    }
  }
  return out;
}

Dataset run_experiment(const EnsembleConfig& config, std::uint32_t experiment) {
  config.validate();
  std::size_t n = config.events_per_experiment;
  if (config.yield_mode == YieldMode::Poisson) {
    Rng rng(stream_key({config.seed, experiment, kPoissonStream}));
    n = static_cast<std::size_t>(rng.poisson(config.poisson_mean));
  }
  Dataset d;
  d.experiment_id = experiment;
  d.events = sample_events(n, config.b0_fraction, config.model, config.seed, experiment);
  return d;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned count = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  for (unsigned k = 0; k < count; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

EnsembleResult run_ensemble(const EnsembleConfig& config, const Fitter& fitter, unsigned threads) {
  config.validate();
  EnsembleResult out;
  out.entries.resize(config.n_experiments);
  parallel_for(config.n_experiments, threads, [&](std::size_t i) {
    EnsembleEntry& e = out.entries[i];
    e.experiment_id = static_cast<std::uint32_t>(i);
    try {
      const Dataset d = run_experiment(config, e.experiment_id);
      e.fit = fitter.minimize(d);
      e.failed = !e.fit.converged;
      if (e.failed) e.error = "fit did not converge";
    } catch (const Error& err) {
      e.failed = true;
      e.error = err.what();
    }
  });
  for (const EnsembleEntry& e : out.entries) out.n_failed += e.failed ? 1 : 0;
  return out;
}

}  // namespace wvamp
