#pragma once

// Exact dynamics of the neutral B meson as a two-level non-Hermitian system.
//
// Units: hbar = 1, times in ps, masses and widths in 1/ps. The flavor basis
// is (|B0>, |B0bar>); the mass eigenstates are |B_L> = p|B0> + q|B0bar> and
// |B_H> = p|B0> - q|B0bar>.

#include <array>
#include <complex>

namespace wvamp {

using Complex = std::complex<double>;
using Vec2 = std::array<Complex, 2>;

/// Dense 2x2 complex matrix in the flavor basis, row-major.
struct Mat2 {
  std::array<Complex, 4> m{};

  static Mat2 identity() { return Mat2{{Complex{1.0}, Complex{}, Complex{}, Complex{1.0}}}; }

  Complex& operator()(int row, int col) { return m[static_cast<std::size_t>(2 * row + col)]; }
  Complex operator()(int row, int col) const { return m[static_cast<std::size_t>(2 * row + col)]; }

  Complex trace() const { return m[0] + m[3]; }
  Complex determinant() const { return m[0] * m[3] - m[1] * m[2]; }
  /// Both eigenvalues, ordered by ascending real part.
  std::array<Complex, 2> eigenvalues() const;

  friend Mat2 operator+(const Mat2& a, const Mat2& b);
  friend Mat2 operator-(const Mat2& a, const Mat2& b);
  friend Mat2 operator*(const Mat2& a, const Mat2& b);
  friend Mat2 operator*(Complex s, const Mat2& a);
  friend Vec2 operator*(const Mat2& a, const Vec2& v);
};

/// <u|v> with the bra conjugated.
Complex inner(const Vec2& u, const Vec2& v);

enum class Flavor { B0, B0bar };

constexpr Flavor opposite(Flavor f) { return f == Flavor::B0 ? Flavor::B0bar : Flavor::B0; }
const char* to_string(Flavor f);

/// Masses and widths of the two mass eigenstates.
class MesonParams {
 public:
  MesonParams(double m_light, double m_heavy, double gamma_light, double gamma_heavy);

  /// Builds the eigenstate parameters from the averages and splittings.
  static MesonParams from_averages(double mass, double gamma, double delta_m, double delta_gamma = 0.0);

  double m_light() const { return m_light_; }
  double m_heavy() const { return m_heavy_; }
  double gamma_light() const { return gamma_light_; }
  double gamma_heavy() const { return gamma_heavy_; }

  double mass() const { return 0.5 * (m_light_ + m_heavy_); }
  double gamma() const { return 0.5 * (gamma_light_ + gamma_heavy_); }
  double delta_m() const { return m_heavy_ - m_light_; }
  double delta_gamma() const { return gamma_heavy_ - gamma_light_; }
  double tau() const { return 1.0 / gamma(); }

 private:
  double m_light_, m_heavy_, gamma_light_, gamma_heavy_;
};

/// Mixing coefficients p, q with |p|^2 + |q|^2 = 1. Only p and q are stored;
/// the phase varphi = arg(p/q) is derived on demand.
class MixingParams {
 public:
  MixingParams(Complex p, Complex q);

  /// q real and non-negative, p = |p| e^{i varphi}.
  static MixingParams from_polar(double abs_p, double varphi);

  Complex p() const { return p_; }
  Complex q() const { return q_; }
  double abs_p() const { return std::abs(p_); }
  double abs_q() const { return std::abs(q_); }
  /// arg(p/q); zero when either coefficient vanishes.
  double varphi() const;

  /// The CP-conjugate parameter set (p <-> q).
  MixingParams swapped() const { return MixingParams(q_, p_); }

 private:
  Complex p_, q_;
};

/// Postselected meson state r|B0> + s|B0bar>, |r|^2 + |s|^2 = 1.
class Postselection {
 public:
  Postselection(Complex r, Complex s);

  /// s real and non-negative, r = |r| e^{i theta}.
  static Postselection from_polar(double abs_r, double theta);

  Complex r() const { return r_; }
  Complex s() const { return s_; }
  double abs_r() const { return std::abs(r_); }
  double abs_s() const { return std::abs(s_); }
  /// arg(r/s); zero when either coefficient vanishes.
  double theta() const;

  Vec2 state() const { return {r_, s_}; }
  /// The CP-conjugate postselection s|B0> + r|B0bar>.
  Postselection cp_conjugate() const { return Postselection(s_, r_); }
  /// The orthogonal partner (-s*, r*).
  Postselection orthogonal() const { return Postselection(-std::conj(s_), std::conj(r_)); }

 private:
  Complex r_, s_;
};

/// Coefficients of a flavor-tagged meson after time delta_t.
struct EvolvedState {
  Complex a;  // along |B0>
  Complex b;  // along |B0bar>
  double delta_t = 0.0;

  Vec2 vec() const { return {a, b}; }
  double norm() const { return std::norm(a) + std::norm(b); }
};

struct WeakValue {
  Complex value;
};

Vec2 flavor_state(Flavor f);

/// Effective Hamiltonian in the flavor basis; rejects p = 0 or q = 0.
Mat2 build_hamiltonian(const MesonParams& mp, const MixingParams& mix);

/// (2/delta_m) [H - (m - i Gamma/2)]; delta_m = 0 raises DegenerateSpectrum.
Mat2 normalized_operator(const MesonParams& mp, const MixingParams& mix);

/// exp(-i delta_t H)|flavor>; negative delta_t is rejected.
EvolvedState evolve(Flavor flavor, double delta_t, const MesonParams& mp, const MixingParams& mix);

/// Norm of the evolved state, i.e. the probability that no decay happened yet.
double survival_probability(Flavor flavor, double delta_t, const MesonParams& mp, const MixingParams& mix);

/// |<B_decay|B0(dt)>|^2 for a B0 tag, |<B_decay-bar|B0bar(dt)>|^2 for a
/// B0bar tag, where B_decay-bar is the CP conjugate of the postselection.
double transition_probability(const Postselection& post, Flavor flavor, double delta_t,
                              const MesonParams& mp, const MixingParams& mix);

/// Weak value <phi|A|B0>/<phi|B0> of the normalized operator, with
/// |phi> = r|B0> + s|B0bar>. Equals -(q s*)/(p r*) when delta_gamma = 0.
WeakValue weak_value(const MesonParams& mp, const MixingParams& mix, const Postselection& post);

/// First-order (linear response) approximation of transition_probability:
/// e^{-Gamma dt} |<phi|psi>|^2 exp(2 g Im A_w) with g = delta_m dt / 2.
double linear_approx_probability(const Postselection& post, Flavor flavor, double delta_t,
                                 const MesonParams& mp, const MixingParams& mix);

}  // namespace wvamp
