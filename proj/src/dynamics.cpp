#include "wvamp/dynamics.hpp"

#include <cmath>
#include <sstream>

#include "wvamp/errors.hpp"

namespace wvamp {

namespace {

constexpr double kNormTolerance = 1e-12;

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// Phases e^{-i m t - Gamma t / 2} of the light and heavy eigenstates.
struct EigenPhases {
  Complex light, heavy;
};

EigenPhases eigen_phases(double t, const MesonParams& mp) {
  const Complex i{0.0, 1.0};
  return {std::exp(-i * mp.m_light() * t - 0.5 * mp.gamma_light() * t),
          std::exp(-i * mp.m_heavy() * t - 0.5 * mp.gamma_heavy() * t)};
}

void require_time(double delta_t) {
  if (!(delta_t >= 0.0) || !std::isfinite(delta_t)) {
    std::ostringstream os;
    os << "delta_t must be finite and non-negative, got " << delta_t;
    throw InvalidArgument(os.str());
  }
}

}  // namespace

Mat2 operator+(const Mat2& a, const Mat2& b) {
  Mat2 out;
  for (std::size_t k = 0; k < 4; ++k) out.m[k] = a.m[k] + b.m[k];
  return out;
}

Mat2 operator-(const Mat2& a, const Mat2& b) {
  Mat2 out;
  for (std::size_t k = 0; k < 4; ++k) out.m[k] = a.m[k] - b.m[k];
  return out;
}

Mat2 operator*(const Mat2& a, const Mat2& b) {
  Mat2 out;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) out(r, c) = a(r, 0) * b(0, c) + a(r, 1) * b(1, c);
  return out;
}

Mat2 operator*(Complex s, const Mat2& a) {
  Mat2 out;
  for (std::size_t k = 0; k < 4; ++k) out.m[k] = s * a.m[k];
  return out;
}

Vec2 operator*(const Mat2& a, const Vec2& v) {
  return {a(0, 0) * v[0] + a(0, 1) * v[1], a(1, 0) * v[0] + a(1, 1) * v[1]};
}

std::array<Complex, 2> Mat2::eigenvalues() const {
  const Complex half_trace = 0.5 * trace();
  const Complex root = std::sqrt(half_trace * half_trace - determinant());
  Complex lo = half_trace - root;
  Complex hi = half_trace + root;
  if (lo.real() > hi.real()) std::swap(lo, hi);
  return {lo, hi};
}

Complex inner(const Vec2& u, const Vec2& v) { return std::conj(u[0]) * v[0] + std::conj(u[1]) * v[1]; }

const char* to_string(Flavor f) { return f == Flavor::B0 ? "B0" : "B0bar"; }

MesonParams::MesonParams(double m_light, double m_heavy, double gamma_light, double gamma_heavy)
    : m_light_(m_light), m_heavy_(m_heavy), gamma_light_(gamma_light), gamma_heavy_(gamma_heavy) {
  if (!std::isfinite(m_light) || !std::isfinite(m_heavy) || !std::isfinite(gamma_light) ||
      !std::isfinite(gamma_heavy))
    throw InvalidArgument("meson parameters must be finite");
  if (m_light > m_heavy) throw InvalidArgument("meson parameters require m_light <= m_heavy");
  if (!(gamma_light > 0.0) || !(gamma_heavy > 0.0))
    throw InvalidArgument("meson widths must be positive");
}

MesonParams MesonParams::from_averages(double mass, double gamma, double delta_m, double delta_gamma) {
  return MesonParams(mass - 0.5 * delta_m, mass + 0.5 * delta_m, gamma - 0.5 * delta_gamma,
                     gamma + 0.5 * delta_gamma);
}

MixingParams::MixingParams(Complex p, Complex q) : p_(p), q_(q) {
  if (!finite(p) || !finite(q)) throw InvalidArgument("mixing coefficients must be finite");
  const double norm = std::norm(p) + std::norm(q);
  if (std::abs(norm - 1.0) > kNormTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "mixing coefficients must satisfy |p|^2+|q|^2=1, got " << norm;
    throw InvalidArgument(os.str());
  }
}

MixingParams MixingParams::from_polar(double abs_p, double varphi) {
  if (!(abs_p >= 0.0 && abs_p <= 1.0)) throw InvalidArgument("|p| must lie in [0, 1]");
  return MixingParams(std::polar(abs_p, varphi), Complex{std::sqrt(1.0 - abs_p * abs_p), 0.0});
}

double MixingParams::varphi() const {
  if (p_ == Complex{} || q_ == Complex{}) return 0.0;
  return std::arg(p_ / q_);
}

Postselection::Postselection(Complex r, Complex s) : r_(r), s_(s) {
  if (!finite(r) || !finite(s)) throw InvalidArgument("postselection coefficients must be finite");
  const double norm = std::norm(r) + std::norm(s);
  if (std::abs(norm - 1.0) > kNormTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "postselection must satisfy |r|^2+|s|^2=1, got " << norm;
    throw InvalidArgument(os.str());
  }
}

Postselection Postselection::from_polar(double abs_r, double theta) {
  if (!(abs_r >= 0.0 && abs_r <= 1.0)) throw InvalidArgument("|r| must lie in [0, 1]");
  return Postselection(std::polar(abs_r, theta), Complex{std::sqrt(1.0 - abs_r * abs_r), 0.0});
}

double Postselection::theta() const {
  if (r_ == Complex{} || s_ == Complex{}) return 0.0;
  return std::arg(r_ / s_);
}

Vec2 flavor_state(Flavor f) {
  return f == Flavor::B0 ? Vec2{Complex{1.0}, Complex{}} : Vec2{Complex{}, Complex{1.0}};
}

Mat2 build_hamiltonian(const MesonParams& mp, const MixingParams& mix) {
  if (mix.p() == Complex{} || mix.q() == Complex{})
    throw InvalidArgument("hamiltonian is undefined for p = 0 or q = 0");
  const Complex i{0.0, 1.0};
  const Complex diag = mp.mass() - 0.5 * i * mp.gamma();
  const Complex split = mp.delta_m() - 0.5 * i * mp.delta_gamma();
  Mat2 h;
  h(0, 0) = diag;
  h(1, 1) = diag;
  h(0, 1) = -split * mix.p() / (2.0 * mix.q());
  h(1, 0) = -split * mix.q() / (2.0 * mix.p());
  return h;
}

Mat2 normalized_operator(const MesonParams& mp, const MixingParams& mix) {
  if (!(mp.delta_m() > 0.0)) throw DegenerateSpectrum("normalized operator requires delta_m > 0");
  const Complex i{0.0, 1.0};
  const Mat2 shifted = build_hamiltonian(mp, mix) - (mp.mass() - 0.5 * i * mp.gamma()) * Mat2::identity();
  return Complex{2.0 / mp.delta_m()} * shifted;
}

EvolvedState evolve(Flavor flavor, double delta_t, const MesonParams& mp, const MixingParams& mix) {
  require_time(delta_t);
  if (mix.p() == Complex{} || mix.q() == Complex{})
    throw InvalidArgument("evolution is undefined for p = 0 or q = 0");
  const auto [light, heavy] = eigen_phases(delta_t, mp);
  const Complex plus = 0.5 * (light + heavy);
  const Complex minus = 0.5 * (light - heavy);
  if (flavor == Flavor::B0) return {plus, mix.q() / mix.p() * minus, delta_t};
  return {mix.p() / mix.q() * minus, plus, delta_t};
}

double survival_probability(Flavor flavor, double delta_t, const MesonParams& mp, const MixingParams& mix) {
  require_time(delta_t);
  // The B0bar expression follows from p <-> q.
  const double own = flavor == Flavor::B0 ? mix.abs_p() : mix.abs_q();
  const double other = flavor == Flavor::B0 ? mix.abs_q() : mix.abs_p();
  if (own == 0.0) throw InvalidArgument("survival probability undefined for a vanishing mixing coefficient");
  const double own2 = own * own;
  const double pure = std::exp(-mp.gamma_light() * delta_t) + std::exp(-mp.gamma_heavy() * delta_t);
  return pure / (4.0 * own2) +
         (own2 - other * other) / (2.0 * own2) * std::exp(-mp.gamma() * delta_t) * std::cos(mp.delta_m() * delta_t);
}

double transition_probability(const Postselection& post, Flavor flavor, double delta_t, const MesonParams& mp,
                              const MixingParams& mix) {
  require_time(delta_t);
  // The CP-conjugate process is the B0 expression with p <-> q.
  const MixingParams eff = flavor == Flavor::B0 ? mix : mix.swapped();
  if (eff.p() == Complex{}) throw InvalidArgument("transition probability undefined for p = 0");

  const double ratio = eff.abs_q() / eff.abs_p();
  const double r2 = std::norm(post.r());
  const double qs2 = ratio * ratio * std::norm(post.s());
  const double cross = post.abs_r() * post.abs_s() * ratio;
  const double rel = post.theta() - eff.varphi();

  const double el = std::exp(-mp.gamma_light() * delta_t);
  const double eh = std::exp(-mp.gamma_heavy() * delta_t);
  const double em = std::exp(-mp.gamma() * delta_t);
  const double x = mp.delta_m() * delta_t;

  return 0.5 * (r2 + qs2) * 0.5 * (el + eh) + 0.5 * (r2 - qs2) * em * std::cos(x) +
         cross * std::cos(rel) * 0.5 * (el - eh) - cross * std::sin(rel) * em * std::sin(x);
}

WeakValue weak_value(const MesonParams& mp, const MixingParams& mix, const Postselection& post) {
  if (post.r() == Complex{}) throw SingularPostselection("weak value is singular for r = 0");
  if (mix.p() == Complex{}) throw InvalidArgument("weak value undefined for p = 0");
  Complex scale{1.0};
  if (mp.delta_gamma() != 0.0) {
    if (!(mp.delta_m() > 0.0))
      throw DegenerateSpectrum("weak value of the normalized operator requires delta_m > 0");
    scale = Complex{1.0, -0.5 * mp.delta_gamma() / mp.delta_m()};
  }
  return {-scale * (mix.q() * std::conj(post.s())) / (mix.p() * std::conj(post.r()))};
}

double linear_approx_probability(const Postselection& post, Flavor flavor, double delta_t, const MesonParams& mp,
                                 const MixingParams& mix) {
  require_time(delta_t);
  const MixingParams eff = flavor == Flavor::B0 ? mix : mix.swapped();
  const double overlap2 = std::norm(post.r());
  if (overlap2 == 0.0) return 0.0;
  const double g = 0.5 * mp.delta_m() * delta_t;
  const double im_aw = weak_value(mp, eff, post).value.imag();
  return std::exp(-mp.gamma() * delta_t) * overlap2 * std::exp(2.0 * g * im_aw);
}

}  // namespace wvamp
