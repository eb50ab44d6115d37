#pragma once

// Unbinned negative log-likelihood of a tagged decay-time dataset with
// Gaussian-constrained nuisance parameters f_phys, mu and sigma.

#include <optional>
#include <vector>

#include "wvamp/dataset.hpp"
#include "wvamp/experiment_model.hpp"

namespace wvamp {

struct ConstraintWidths {
  double f_phys = 0.02;
  double mu = 0.01;     // ps
  double sigma = 0.04;  // ps

  void validate() const;
};

/// Value of the NLL with its gradient and Hessian in (varphi, f_phys) at
/// fixed resolution nuisances.
struct LocalExpansion {
  double value = 0.0;
  double d_phi = 0.0, d_f = 0.0;
  double d_phi_phi = 0.0, d_phi_f = 0.0, d_f_f = 0.0;
};

struct NuisanceValues {
  double f_phys = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
};

/// Nominal nuisance values of a model.
NuisanceValues nominal_nuisances(const ObservableModel& model);

/// Sum of z^2/2 with z = (value - nominal)/width.
double constraint_term(const NuisanceValues& v, const NuisanceValues& nominal, const ConstraintWidths& w);

/// Bottom-up pairwise sum; adjacent pairs are added level by level.
double pairwise_sum(std::vector<double> values);

/// NLL evaluator bound to one dataset. Events are held in canonical order
/// (by delta_t, then tag) so the value does not depend on input order.
/// The convolved basis for the most recent (mu, sigma) is cached; an
/// instance must therefore not be shared between threads.
class Likelihood {
 public:
  Likelihood(const Dataset& data, const ObservableModel& model, const ConstraintWidths& widths);

  /// -sum ln P(dt_i | tag_i) + constraint_term.
  double operator()(double varphi, const NuisanceValues& v) const;

  /// NLL with derivatives in varphi and f_phys; value identical to operator().
  LocalExpansion expand(double varphi, const NuisanceValues& v) const;

  /// Data part only.
  double data_term(double varphi, const NuisanceValues& v) const;

  const ObservableModel& model() const { return model_; }
  const ConstraintWidths& widths() const { return widths_; }
  const NuisanceValues& nominal() const { return nominal_; }
  std::size_t size() const { return events_.size(); }

 private:
  void ensure_basis(double mu, double sigma) const;
  void check_density(double p, std::size_t i, double varphi) const;

  std::vector<Event> events_;
  ObservableModel model_;
  ConstraintWidths widths_;
  NuisanceValues nominal_;
  double t_lo_, t_hi_;

  mutable std::optional<std::pair<double, double>> cached_key_;
  mutable std::vector<ConvolvedBasis> basis_;
};

/// One-shot NLL.
double nll(const Dataset& data, double varphi, const NuisanceValues& v, const ObservableModel& model,
           const ConstraintWidths& widths);

}  // namespace wvamp
