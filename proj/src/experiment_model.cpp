#include "wvamp/experiment_model.hpp"

#include <cmath>
#include <sstream>

#include "wvamp/errors.hpp"

namespace wvamp {

namespace {

void require(bool ok, std::ostringstream& os, const char* msg) {
  if (!ok) os << msg << "; ";
}

bool fraction(double x) { return x >= 0.0 && x <= 1.0; }

void raise_if(std::ostringstream& os, const char* what) {
  const std::string msg = os.str();
  if (!msg.empty()) throw InvalidArgument(std::string("invalid ") + what + ": " + msg);
}

}  // namespace

void SignalParams::validate() const {
  std::ostringstream os;
  require(tau > 0.0 && std::isfinite(tau), os, "tau must be positive");
  require(std::isfinite(delta_m), os, "delta_m must be finite");
  require(fraction(abs_r), os, "abs_r must lie in [0, 1]");
  require(std::isfinite(theta) && std::isfinite(varphi), os, "angles must be finite");
  raise_if(os, "signal parameters");
}

void BackgroundParams::validate() const {
  std::ostringstream os;
  require(tau_bkg > 0.0 && std::isfinite(tau_bkg), os, "tau_bkg must be positive");
  raise_if(os, "background parameters");
}

void DetectorConfig::validate() const {
  std::ostringstream os;
  require(fraction(f_phys), os, "f_phys must lie in [0, 1]");
  require(wrong_tag >= 0.0 && wrong_tag <= 0.5, os, "wrong_tag must lie in [0, 0.5]");
  require(n_bb >= 0.0 && std::isfinite(n_bb), os, "n_bb must be non-negative");
  require(fraction(br_upsilon) && fraction(br_signal) && fraction(br_kstar) && fraction(br_ks), os,
          "branching fractions must lie in [0, 1]");
  require(fraction(eff_tag) && fraction(eff_reco), os, "efficiencies must lie in [0, 1]");
  raise_if(os, "detector configuration");
}

void ObservableModel::validate() const {
  signal.validate();
  resolution.validate();
  background.validate();
  detector.validate();
}

double signal_normalization(const SignalParams& sp) {
  const double x = sp.tau * sp.delta_m;
  const double n = sp.tau * (1.0 + (2.0 * sp.abs_r * sp.abs_r - 1.0) / (1.0 + x * x));
  if (!(n > 0.0)) throw InvalidArgument("signal normalization must be positive");
  return n;
}

SignalShape signal_shape(Flavor flavor, const SignalParams& sp, double wrong_tag) {
  sp.validate();
  if (!(wrong_tag >= 0.0 && wrong_tag <= 0.5)) throw InvalidArgument("wrong_tag must lie in [0, 0.5]");
  const double r = sp.abs_r;
  const double amp = 2.0 * r * std::sqrt(1.0 - r * r);
  const double s_b0 = -amp * std::sin(sp.theta - sp.varphi);
  const double s_b0bar = -amp * std::sin(sp.theta + sp.varphi);
  const double own = flavor == Flavor::B0 ? s_b0 : s_b0bar;
  const double other = flavor == Flavor::B0 ? s_b0bar : s_b0;
  SignalShape out;
  out.cos_coef = 2.0 * r * r - 1.0;
  out.sin_coef = (1.0 - wrong_tag) * own + wrong_tag * other;
  out.norm = signal_normalization(sp);
  return out;
}

namespace {

double evaluate_shape(double delta_t, const SignalShape& s, const SignalParams& sp) {
  const double x = sp.delta_m * delta_t;
  return std::exp(-std::abs(delta_t) / sp.tau) / (2.0 * s.norm) *
         (1.0 + s.cos_coef * std::cos(x) + s.sin_coef * std::sin(x));
}

}  // namespace

double signal_pdf(double delta_t, Flavor flavor, const SignalParams& sp) {
  return evaluate_shape(delta_t, signal_shape(flavor, sp), sp);
}

double background_pdf(double delta_t, const BackgroundParams& bp) {
  bp.validate();
  return std::exp(-std::abs(delta_t) / bp.tau_bkg) / (2.0 * bp.tau_bkg);
}

double diluted_signal_pdf(double delta_t, Flavor flavor, const SignalParams& sp, double wrong_tag) {
  return evaluate_shape(delta_t, signal_shape(flavor, sp, wrong_tag), sp);
}

double expected_yield(const DetectorConfig& dc) {
  dc.validate();
  return dc.n_bb * dc.br_upsilon * dc.br_signal * dc.br_kstar * dc.br_ks * dc.eff_tag * dc.eff_reco;
}

double mixture_pdf(double delta_t, Flavor flavor, const SignalParams& sp, const BackgroundParams& bp,
                   const DetectorConfig& dc) {
  dc.validate();
  return dc.f_phys * diluted_signal_pdf(delta_t, flavor, sp, dc.effective_wrong_tag()) +
         (1.0 - dc.f_phys) * background_pdf(delta_t, bp);
}

double combine(const ConvolvedBasis& b, const SignalShape& shape, const BackgroundParams& bp, double f_phys) {
  const double sig = (b.exp + shape.cos_coef * b.cos + shape.sin_coef * b.sin) / (2.0 * shape.norm);
  const double bkg = b.bkg / (2.0 * bp.tau_bkg);
  return f_phys * sig + (1.0 - f_phys) * bkg;
}

double convolved_pdf(double delta_t, Flavor flavor, const SignalParams& sp, const ResolutionParams& rp,
                     const BackgroundParams& bp, const DetectorConfig& dc) {
  dc.validate();
  bp.validate();
  const SignalShape shape = signal_shape(flavor, sp, dc.effective_wrong_tag());
  const ResolutionConvolver conv(rp, sp.tau, sp.delta_m, bp.tau_bkg, delta_t, delta_t);
  const double value = combine(conv.evaluate(delta_t), shape, bp, dc.f_phys);
  if (!std::isfinite(value) || value < 0.0) {
    std::ostringstream os;
    os.precision(17);
    os << "convolved density is " << value << " at delta_t = " << delta_t;
    throw NumericFailure(os.str());
  }
  return value;
}

}  // namespace wvamp
