#pragma once

// Seeded generation of pseudo-experiments and ensemble orchestration.

#include <cstdint>
#include <functional>
#include <vector>

#include "wvamp/dataset.hpp"
#include "wvamp/experiment_model.hpp"
#include "wvamp/fitter.hpp"
#include "wvamp/random.hpp"

namespace wvamp {

enum class YieldMode { Fixed, Poisson };

struct EnsembleConfig {
  std::size_t n_experiments = 200;
  std::size_t events_per_experiment = 3200;
  YieldMode yield_mode = YieldMode::Fixed;
  double poisson_mean = 3200.0;
  double b0_fraction = 0.5;
  std::uint64_t seed = 1;
  ObservableModel model;

  void validate() const;
};

/// Exact sampler of the unconvolved, wrong-tag diluted signal density for
/// one tag, by accept-reject under a two-sided exponential envelope.
class PhysicsSampler {
 public:
  PhysicsSampler(const SignalParams& sp, Flavor tag, double wrong_tag);

  double sample(Rng& rng) const;

  /// Acceptance probability of the chosen envelope.
  double efficiency() const { return efficiency_; }
  double envelope_scale() const { return lambda_; }
  double majorant() const { return bound_; }

 private:
  double bracket(double t) const;

  SignalParams sp_;
  SignalShape shape_;
  double lambda_ = 0.0;
  double bound_ = 0.0;
  double efficiency_ = 0.0;
};

/// Draws n events: round(n * b0_fraction) B0-tagged, the rest B0bar-tagged.
/// Every event owns a random stream keyed by (seed, experiment, tag, index),
/// so the output is a pure function of the arguments.
std::vector<Event> sample_events(std::size_t n, double b0_fraction, const ObservableModel& model,
                                 std::uint64_t seed, std::uint32_t experiment = 0);

/// One pseudo-experiment of the ensemble.
Dataset run_experiment(const EnsembleConfig& config, std::uint32_t experiment);

struct EnsembleEntry {
  std::uint32_t experiment_id = 0;
  FitResult fit;
  bool failed = false;
  std::string error;
};

struct EnsembleResult {
  std::vector<EnsembleEntry> entries;  // ordered by experiment id
  std::size_t n_failed = 0;
};

/// Generates and fits every experiment, running `threads` workers.
EnsembleResult run_ensemble(const EnsembleConfig& config, const Fitter& fitter, unsigned threads = 1);

/// Runs fn(i) for i in [0, n) on a pool of `threads` workers.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace wvamp
