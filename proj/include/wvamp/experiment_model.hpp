#pragma once

// Observable-level decay-time model: two-sided signal densities, background,
// resolution convolution, wrong-tag dilution and the expected yield.

#include <memory>
#include <vector>

#include "wvamp/crystal_ball.hpp"
#include "wvamp/dynamics.hpp"

namespace wvamp {

constexpr double kDegree = 3.14159265358979323846 / 180.0;

struct SignalParams {
  double tau = 1.519;     // ps
  double delta_m = 0.506; // 1/ps
  double abs_r = 0.5;
  double theta = 0.0;     // rad
  double varphi = 44.4 * kDegree;

  void validate() const;
};

struct BackgroundParams {
  double tau_bkg = 0.896;  // ps

  void validate() const;
};

struct DetectorConfig {
  double f_phys = 0.66;
  double wrong_tag = 0.02;
  bool apply_wrong_tag = true;
  double n_bb = 550e8;
  double br_upsilon = 0.49;
  double br_signal = 4.2e-5;
  double br_kstar = 0.17;
  double br_ks = 0.69;
  double eff_tag = 0.136;
  double eff_reco = 0.182;

  /// Wrong-tag fraction actually applied.
  double effective_wrong_tag() const { return apply_wrong_tag ? wrong_tag : 0.0; }
  void validate() const;
};

/// Everything needed to evaluate or sample the observable density.
struct ObservableModel {
  SignalParams signal;
  ResolutionParams resolution;
  BackgroundParams background;
  DetectorConfig detector;

  void validate() const;
};

/// Signal density as e^{-|t|/tau} / (2N) [1 + C cos(dm t) + S sin(dm t)].
struct SignalShape {
  double cos_coef = 0.0;
  double sin_coef = 0.0;
  double norm = 1.0;  // N
};

/// Coefficients for one tag, with optional wrong-tag dilution w.
SignalShape signal_shape(Flavor flavor, const SignalParams& sp, double wrong_tag = 0.0);

/// N = tau (1 + (2|r|^2 - 1) / (1 + (tau dm)^2)).
double signal_normalization(const SignalParams& sp);

double signal_pdf(double delta_t, Flavor flavor, const SignalParams& sp);

/// e^{-|t|/tau_bkg} / (2 tau_bkg).
double background_pdf(double delta_t, const BackgroundParams& bp);

/// (1 - w) signal_pdf(flavor) + w signal_pdf(opposite flavor).
double diluted_signal_pdf(double delta_t, Flavor flavor, const SignalParams& sp, double wrong_tag);

double expected_yield(const DetectorConfig& dc);

/// Unconvolved mixture f P_phys + (1 - f) P_bkg with dilution applied.
double mixture_pdf(double delta_t, Flavor flavor, const SignalParams& sp, const BackgroundParams& bp,
                   const DetectorConfig& dc);

/// Values at one observed time of the basis functions convolved with the
/// resolution: e^{-|t|/tau}, e^{-|t|/tau} cos(dm t), e^{-|t|/tau} sin(dm t)
/// and e^{-|t|/tau_bkg}.
struct ConvolvedBasis {
  double exp = 0.0;
  double cos = 0.0;
  double sin = 0.0;
  double bkg = 0.0;
};

/// Convolution of the basis functions with a crystal-ball resolution over a
/// fixed range of observed times. Running integrals of the kernel weighted by
/// exponentials are tabulated once on a panel grid; each evaluation then
/// integrates only the partial panel containing the point.
class ResolutionConvolver {
 public:
  ResolutionConvolver(const ResolutionParams& rp, double tau, double delta_m, double tau_bkg, double t_lo,
                      double t_hi);

  /// Raises InvalidArgument outside [t_lo, t_hi].
  ConvolvedBasis evaluate(double delta_t) const;

  double t_lo() const { return t_lo_; }
  double t_hi() const { return t_hi_; }
  const CrystalBall& kernel() const { return cb_; }

 private:
  void build_grid(double z_lo, double z_hi);
  void tabulate();

  CrystalBall cb_;
  double tau_, delta_m_, tau_bkg_;
  double t_lo_, t_hi_;
  double k_exp_, k_bkg_;
  double omega_;
  std::vector<double> nodes_;
  // Running integrals from the left (L) and from the right (R) at each node.
  std::vector<double> left_exp_, right_exp_, left_bkg_, right_bkg_;
  std::vector<Complex> left_osc_, right_osc_;
};

/// Combines a convolved basis into the observable density.
double combine(const ConvolvedBasis& b, const SignalShape& shape, const BackgroundParams& bp, double f_phys);

/// f_phys (P_phys * R) + (1 - f_phys)(P_bkg * R), dilution applied before
/// convolution.
double convolved_pdf(double delta_t, Flavor flavor, const SignalParams& sp, const ResolutionParams& rp,
                     const BackgroundParams& bp, const DetectorConfig& dc);

}  // namespace wvamp
