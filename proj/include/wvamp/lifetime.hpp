#pragma once

// Decay-time distributions and effective lifetimes with and without a
// postselected final state.

#include "wvamp/dynamics.hpp"

namespace wvamp {

struct LifetimeResult {
  double tau_eff = 0.0;              // ps
  double amplification_ratio = 0.0;  // tau_eff * Gamma
};

/// Unselected decay-time density -d/dt <B(t)|B(t)>.
double pdf_unselected(double delta_t, const MesonParams& mp, const MixingParams& mix, Flavor flavor = Flavor::B0);

/// First moment of pdf_unselected.
LifetimeResult lifetime_unselected(const MesonParams& mp, const MixingParams& mix, Flavor flavor = Flavor::B0);

/// Integral of transition_probability over [0, inf), closed form, general widths.
double conditional_normalization(const Postselection& post, Flavor flavor, const MesonParams& mp,
                                 const MixingParams& mix);

/// Integral of t * transition_probability over [0, inf), closed form, general widths.
double conditional_first_moment(const Postselection& post, Flavor flavor, const MesonParams& mp,
                                const MixingParams& mix);

/// transition_probability / conditional_normalization. Raises
/// DegeneratePostselection when the normalization vanishes.
double conditional_pdf_exact(double delta_t, const Postselection& post, Flavor flavor, const MesonParams& mp,
                             const MixingParams& mix);

/// The conditional density written for Gamma_L = Gamma_H = Gamma. The caller
/// is responsible for the equal-width assumption; only Gamma is used.
double conditional_pdf_equalwidth(double delta_t, const Postselection& post, Flavor flavor, const MesonParams& mp,
                                  const MixingParams& mix);

/// Effective lifetime of the postselected decay in the weak-value form
/// (equal widths). r = 0 raises SingularPostselection.
LifetimeResult effective_lifetime(const Postselection& post, Flavor flavor, const MesonParams& mp,
                                  const MixingParams& mix);

/// Ratio of the closed-form first moment to the closed-form normalization.
/// Agrees with effective_lifetime at equal widths and remains valid otherwise.
LifetimeResult conditional_mean_lifetime(const Postselection& post, Flavor flavor, const MesonParams& mp,
                                         const MixingParams& mix);

/// (1/Gamma)(1 + Im[A_w] delta_m / Gamma).
double effective_lifetime_first_order(const Postselection& post, Flavor flavor, const MesonParams& mp,
                                      const MixingParams& mix);

/// P(dt | B0 -> B_decay) - P(dt | B0bar -> B_decay-bar) using the equal-width
/// densities, each with its own normalization. Requires |p| = |q|.
double cp_difference(double delta_t, const Postselection& post, const MesonParams& mp, const MixingParams& mix);

}  // namespace wvamp
