#include "wvamp/postselection_map.hpp"

#include <cmath>
#include <sstream>

#include "wvamp/errors.hpp"

namespace wvamp {

namespace {

constexpr double kUnitTolerance = 1e-12;
constexpr double kConsistencyTolerance = 1e-10;

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void require_unit(Complex a, Complex b, const char* what) {
  if (!finite(a) || !finite(b)) throw InvalidArgument(std::string(what) + " coefficients must be finite");
  const double norm = std::norm(a) + std::norm(b);
  if (std::abs(norm - 1.0) > kUnitTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << what << " superposition must be normalized, got " << norm;
    throw InvalidArgument(os.str());
  }
}

}  // namespace

DecayModeSpec::DecayModeSpec(Complex xi1, Complex xi2, Complex eta1, Complex eta2)
    : xi1_(xi1), xi2_(xi2), eta1_(eta1), eta2_(eta2) {
  require_unit(xi1, xi2, "K*");
  require_unit(eta1, eta2, "photon");
}

DecayAmplitudes amplitudes_from_mode(const DecayModeSpec& mode, Complex c) {
  if (c == Complex{} || !finite(c)) throw InvalidArgument("decay constant c must be finite and nonzero");
  return {c * std::conj(mode.xi1()) * std::conj(mode.eta1()), c * std::conj(mode.xi2()) * std::conj(mode.eta2()),
          c};
}

Postselection postselection_from_mode(const DecayModeSpec& mode) {
  const Complex r_raw = mode.xi1() * mode.eta1();
  const Complex s_raw = mode.xi2() * mode.eta2();
  const double norm = std::hypot(std::abs(r_raw), std::abs(s_raw));
  if (norm == 0.0) throw DegeneratePostselection("decay mode has no B0 or B0bar component");

  // Fix the global phase: s real non-negative, or r real positive if s = 0.
  const Complex anchor = std::abs(s_raw) > 0.0 ? s_raw : r_raw;
  const Complex phase = std::conj(anchor) / std::abs(anchor);
  Complex r = r_raw * phase / norm;
  Complex s = s_raw * phase / norm;
  if (std::abs(s_raw) > 0.0) s = Complex{std::abs(s), 0.0};
  else r = Complex{std::abs(r), 0.0};

  // Absorb the rounding of |r|^2 + |s|^2 so the invariant holds to 1e-12.
  const double n = std::sqrt(std::norm(r) + std::norm(s));
  return Postselection(r / n, s / n);
}

ConsistencyReport consistency_check(const DecayModeSpec& mode, const Postselection& post) {
  const DecayAmplitudes amp = amplitudes_from_mode(mode);
  const Complex rs = std::conj(post.r());
  const Complex ss = std::conj(post.s());
  const Complex mismatch = rs * amp.a_f_bar - ss * amp.a_f;
  const double scale = std::abs(ss * amp.a_f_bar);
  double residual = 0.0;
  if (scale > 0.0) {
    residual = std::abs(mismatch) / scale;
  } else {
    const double amp_norm = std::hypot(std::abs(amp.a_f), std::abs(amp.a_f_bar));
    residual = amp_norm > 0.0 ? std::abs(mismatch) / amp_norm : 1.0;
  }
  return {residual < kConsistencyTolerance, residual};
}

}  // namespace wvamp
