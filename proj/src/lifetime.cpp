#include "wvamp/lifetime.hpp"

#include <cmath>

#include "wvamp/errors.hpp"

namespace wvamp {

namespace {

// Coefficients of the four time structures of the transition probability:
//   even * (e^{-G_L t} + e^{-G_H t})/2 + cosine * e^{-G t} cos(dm t)
// + odd * (e^{-G_L t} - e^{-G_H t})/2 + sine * e^{-G t} sin(dm t)
struct TransitionTerms {
  double even, cosine, odd, sine;
};

TransitionTerms transition_terms(const Postselection& post, const MixingParams& eff) {
  if (eff.p() == Complex{}) throw InvalidArgument("transition probability undefined for p = 0");
  const double ratio = eff.abs_q() / eff.abs_p();
  const double r2 = std::norm(post.r());
  const double qs2 = ratio * ratio * std::norm(post.s());
  const double cross = post.abs_r() * post.abs_s() * ratio;
  const double rel = post.theta() - eff.varphi();
  return {0.5 * (r2 + qs2), 0.5 * (r2 - qs2), cross * std::cos(rel), -cross * std::sin(rel)};
}

MixingParams effective_mixing(Flavor flavor, const MixingParams& mix) {
  return flavor == Flavor::B0 ? mix : mix.swapped();
}

// Weak value with the equal-width Hamiltonian.
Complex equal_width_weak_value(const Postselection& post, const MesonParams& mp, const MixingParams& eff) {
  const MesonParams equal = MesonParams::from_averages(mp.mass(), mp.gamma(), mp.delta_m(), 0.0);
  return weak_value(equal, eff, post).value;
}

}  // namespace

double pdf_unselected(double delta_t, const MesonParams& mp, const MixingParams& mix, Flavor flavor) {
  if (!(delta_t >= 0.0)) throw InvalidArgument("delta_t must be non-negative");
  const MixingParams eff = effective_mixing(flavor, mix);
  const double p2 = std::norm(eff.p());
  if (p2 == 0.0) throw InvalidArgument("unselected density undefined for a vanishing mixing coefficient");
  const double asym = (p2 - std::norm(eff.q())) / (2.0 * p2);
  const double gl = mp.gamma_light(), gh = mp.gamma_heavy(), g = mp.gamma(), dm = mp.delta_m();
  return (gl * std::exp(-gl * delta_t) + gh * std::exp(-gh * delta_t)) / (4.0 * p2) +
         asym * std::exp(-g * delta_t) * (dm * std::sin(dm * delta_t) + g * std::cos(dm * delta_t));
}

LifetimeResult lifetime_unselected(const MesonParams& mp, const MixingParams& mix, Flavor flavor) {
  const MixingParams eff = effective_mixing(flavor, mix);
  const double p2 = std::norm(eff.p());
  if (p2 == 0.0) throw InvalidArgument("lifetime undefined for a vanishing mixing coefficient");
  const double g = mp.gamma(), dm = mp.delta_m();
  const double tau = (1.0 / mp.gamma_light() + 1.0 / mp.gamma_heavy()) / (4.0 * p2) +
                     (p2 - std::norm(eff.q())) / (2.0 * p2) * g / (g * g + dm * dm);
  return {tau, tau * g};
}

double conditional_normalization(const Postselection& post, Flavor flavor, const MesonParams& mp,
                                 const MixingParams& mix) {
  const TransitionTerms c = transition_terms(post, effective_mixing(flavor, mix));
  const double gl = mp.gamma_light(), gh = mp.gamma_heavy(), g = mp.gamma(), dm = mp.delta_m();
  const double d2 = g * g + dm * dm;
  return c.even * (0.5 / gl + 0.5 / gh) + c.cosine * g / d2 + c.odd * (0.5 / gl - 0.5 / gh) + c.sine * dm / d2;
}

double conditional_first_moment(const Postselection& post, Flavor flavor, const MesonParams& mp,
                                const MixingParams& mix) {
  const TransitionTerms c = transition_terms(post, effective_mixing(flavor, mix));
  const double gl = mp.gamma_light(), gh = mp.gamma_heavy(), g = mp.gamma(), dm = mp.delta_m();
  const double d2 = g * g + dm * dm;
  return c.even * (0.5 / (gl * gl) + 0.5 / (gh * gh)) + c.cosine * (g * g - dm * dm) / (d2 * d2) +
         c.odd * (0.5 / (gl * gl) - 0.5 / (gh * gh)) + c.sine * 2.0 * g * dm / (d2 * d2);
}

double conditional_pdf_exact(double delta_t, const Postselection& post, Flavor flavor, const MesonParams& mp,
                             const MixingParams& mix) {
  const double norm = conditional_normalization(post, flavor, mp, mix);
  if (!(norm > 0.0)) throw DegeneratePostselection("conditional density has vanishing normalization");
  return transition_probability(post, flavor, delta_t, mp, mix) / norm;
}

double conditional_pdf_equalwidth(double delta_t, const Postselection& post, Flavor flavor, const MesonParams& mp,
                                  const MixingParams& mix) {
  if (!(delta_t >= 0.0)) throw InvalidArgument("delta_t must be non-negative");
  const MixingParams eff = effective_mixing(flavor, mix);
  if (eff.p() == Complex{}) throw InvalidArgument("conditional density undefined for p = 0");
  const double ratio2 = std::norm(eff.q()) / std::norm(eff.p());
  const double r2 = std::norm(post.r());
  const double even = 0.5 * r2 + 0.5 * ratio2 * (1.0 - r2);
  const double cosine = 0.5 * r2 - 0.5 * ratio2 * (1.0 - r2);
  const double sine = -std::sqrt(ratio2) * post.abs_r() * std::sqrt(1.0 - r2) * std::sin(post.theta() - eff.varphi());

  const double g = mp.gamma(), dm = mp.delta_m();
  const double d2 = g * g + dm * dm;
  const double num = even + cosine * std::cos(dm * delta_t) + sine * std::sin(dm * delta_t);
  const double den = even + cosine * g * g / d2 + sine * g * dm / d2;
  if (!(den > 0.0)) throw DegeneratePostselection("conditional density has vanishing normalization");
  return g * std::exp(-g * delta_t) * num / den;
}

LifetimeResult effective_lifetime(const Postselection& post, Flavor flavor, const MesonParams& mp,
                                  const MixingParams& mix) {
  if (post.r() == Complex{}) throw SingularPostselection("effective lifetime is singular for r = 0");
  const Complex aw = equal_width_weak_value(post, mp, effective_mixing(flavor, mix));
  const double a2 = std::norm(aw);
  const double im = aw.imag();
  const double g = mp.gamma(), dm = mp.delta_m();
  const double d2 = g * g + dm * dm;
  const double num = (1.0 + a2) / (g * g) + (1.0 - a2) * (g * g - dm * dm) / (d2 * d2) + 4.0 * im * g * dm / (d2 * d2);
  const double den = (1.0 + a2) / g + (1.0 - a2) * g / d2 + 2.0 * im * dm / d2;
  if (!(den > 0.0)) throw DegeneratePostselection("effective lifetime has vanishing normalization");
  const double tau = num / den;
  return {tau, tau * g};
}

LifetimeResult conditional_mean_lifetime(const Postselection& post, Flavor flavor, const MesonParams& mp,
                                         const MixingParams& mix) {
  const double norm = conditional_normalization(post, flavor, mp, mix);
  if (!(norm > 0.0)) throw DegeneratePostselection("conditional density has vanishing normalization");
  const double tau = conditional_first_moment(post, flavor, mp, mix) / norm;
  return {tau, tau * mp.gamma()};
}

double effective_lifetime_first_order(const Postselection& post, Flavor flavor, const MesonParams& mp,
                                      const MixingParams& mix) {
  if (post.r() == Complex{}) throw SingularPostselection("effective lifetime is singular for r = 0");
  const Complex aw = equal_width_weak_value(post, mp, effective_mixing(flavor, mix));
  const double g = mp.gamma();
  return (1.0 + aw.imag() * mp.delta_m() / g) / g;
}

double cp_difference(double delta_t, const Postselection& post, const MesonParams& mp, const MixingParams& mix) {
  if (std::abs(mix.abs_p() - mix.abs_q()) > 1e-12) throw InvalidArgument("cp_difference requires |p| = |q|");
  if (post.r() == Complex{}) throw SingularPostselection("cp_difference is singular for r = 0");
  return conditional_pdf_equalwidth(delta_t, post, Flavor::B0, mp, mix) -
         conditional_pdf_equalwidth(delta_t, post, Flavor::B0bar, mp, mix);
}

}  // namespace wvamp
