#pragma once

// Maps a measured K* gamma final state onto the effective postselected
// meson state. Photons from b decays are taken to be left-handed, so
// |B0> -> |K*0>|gamma_R> and |B0bar> -> |K*0bar>|gamma_L>.

#include "wvamp/dynamics.hpp"

namespace wvamp {

/// |K*_f> = xi1|K*0> + xi2|K*0bar>,  |gamma_f> = eta1|gamma_R> + eta2|gamma_L>.
class DecayModeSpec {
 public:
  DecayModeSpec(Complex xi1, Complex xi2, Complex eta1, Complex eta2);

  Complex xi1() const { return xi1_; }
  Complex xi2() const { return xi2_; }
  Complex eta1() const { return eta1_; }
  Complex eta2() const { return eta2_; }

  /// Swaps the particle and antiparticle components of both states.
  DecayModeSpec cp_conjugate() const { return DecayModeSpec(xi2_, xi1_, eta2_, eta1_); }

 private:
  Complex xi1_, xi2_, eta1_, eta2_;
};

struct DecayAmplitudes {
  Complex a_f;      // <f|S|B0>
  Complex a_f_bar;  // <f|S|B0bar>
  Complex c_norm;   // common (unobservable) constant
};

/// A_f = c xi1* eta1*,  A_f_bar = c xi2* eta2*.  c = 0 is rejected.
DecayAmplitudes amplitudes_from_mode(const DecayModeSpec& mode, Complex c = Complex{1.0});

/// The postselection with r*/s* = A_f/A_f_bar, i.e. r/s = xi1 eta1 / (xi2 eta2),
/// normalized and phased so that s is real and non-negative (r real and
/// positive when s = 0). Raises DegeneratePostselection when both products vanish.
Postselection postselection_from_mode(const DecayModeSpec& mode);

struct ConsistencyReport {
  bool consistent = false;
  double residual = 0.0;
};

/// Checks r*/s* = A_f/A_f_bar projectively through r* A_f_bar - s* A_f.
/// When s and A_f_bar are nonzero the residual is |r*/s* - A_f/A_f_bar|.
ConsistencyReport consistency_check(const DecayModeSpec& mode, const Postselection& post);

}  // namespace wvamp
