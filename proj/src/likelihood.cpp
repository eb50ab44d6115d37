#include "wvamp/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wvamp/errors.hpp"

namespace wvamp {

void ConstraintWidths::validate() const {
  if (!(f_phys > 0.0) || !(mu > 0.0) || !(sigma > 0.0) || !std::isfinite(f_phys) || !std::isfinite(mu) ||
      !std::isfinite(sigma))
    throw InvalidArgument("constraint widths must be positive and finite");
}

NuisanceValues nominal_nuisances(const ObservableModel& model) {
  return {model.detector.f_phys, model.resolution.mu, model.resolution.sigma};
}

double constraint_term(const NuisanceValues& v, const NuisanceValues& nominal, const ConstraintWidths& w) {
  const double zf = (v.f_phys - nominal.f_phys) / w.f_phys;
  const double zm = (v.mu - nominal.mu) / w.mu;
  const double zs = (v.sigma - nominal.sigma) / w.sigma;
  return 0.5 * (zf * zf + zm * zm + zs * zs);
}

double pairwise_sum(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::size_t n = values.size();
  while (n > 1) {
    const std::size_t half = n / 2;
    for (std::size_t i = 0; i < half; ++i) values[i] = values[2 * i] + values[2 * i + 1];
    if (n % 2 == 1) {
      values[half] = values[n - 1];
      n = half + 1;
    } else {
      n = half;
    }
  }
  return values[0];
}

Likelihood::Likelihood(const Dataset& data, const ObservableModel& model, const ConstraintWidths& widths)
    : events_(data.events), model_(model), widths_(widths), nominal_(nominal_nuisances(model)) {
  if (events_.empty()) throw InvalidArgument("likelihood needs a non-empty dataset");
  model_.validate();
  widths_.validate();
  std::sort(events_.begin(), events_.end(), [](const Event& a, const Event& b) {
    if (a.delta_t != b.delta_t) return a.delta_t < b.delta_t;
    return a.tag == Flavor::B0 && b.tag == Flavor::B0bar;
  });
  for (std::size_t i = 0; i < events_.size(); ++i) {
    if (!std::isfinite(events_[i].delta_t)) throw InvalidArgument("dataset contains a non-finite delta_t");
  }
  t_lo_ = events_.front().delta_t;
  t_hi_ = events_.back().delta_t;
}

void Likelihood::ensure_basis(double mu, double sigma) const {
  if (cached_key_ && cached_key_->first == mu && cached_key_->second == sigma) return;
  ResolutionParams rp = model_.resolution;
  rp.mu = mu;
  rp.sigma = sigma;
  const ResolutionConvolver conv(rp, model_.signal.tau, model_.signal.delta_m, model_.background.tau_bkg, t_lo_,
                                 t_hi_);
  basis_.resize(events_.size());
  for (std::size_t i = 0; i < events_.size(); ++i) basis_[i] = conv.evaluate(events_[i].delta_t);
  cached_key_ = std::make_pair(mu, sigma);
}

double Likelihood::data_term(double varphi, const NuisanceValues& v) const {
  if (!(v.f_phys >= 0.0 && v.f_phys <= 1.0)) throw InvalidArgument("f_phys must lie in [0, 1]");
  if (!(v.sigma > 0.0) || !std::isfinite(v.mu)) throw InvalidArgument("resolution nuisances out of domain");
  ensure_basis(v.mu, v.sigma);

  SignalParams sp = model_.signal;
  sp.varphi = varphi;
  const double w = model_.detector.effective_wrong_tag();
  const SignalShape b0 = signal_shape(Flavor::B0, sp, w);
  const SignalShape b0bar = signal_shape(Flavor::B0bar, sp, w);

  std::vector<double> terms(events_.size());
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const SignalShape& s = events_[i].tag == Flavor::B0 ? b0 : b0bar;
    const double p = combine(basis_[i], s, model_.background, v.f_phys);
    check_density(p, i, varphi);
    terms[i] = -std::log(p);
  }
  return pairwise_sum(std::move(terms));
}

void Likelihood::check_density(double p, std::size_t i, double varphi) const {
  if (p > 0.0 && std::isfinite(p)) return;
  std::ostringstream os;
  os.precision(17);
  os << "density " << p << " at event " << i << " (delta_t = " << events_[i].delta_t
     << ", tag = " << to_string(events_[i].tag) << ", varphi = " << varphi << ")";
  throw NumericFailure(os.str());
}

LocalExpansion Likelihood::expand(double varphi, const NuisanceValues& v) const {
  const double value = (*this)(varphi, v);
  const ObservableModel& m = model_;
  const double w = m.detector.effective_wrong_tag();
  const double norm = signal_normalization(m.signal);
  const double r = m.signal.abs_r;
  const double amp = 2.0 * r * std::sqrt(1.0 - r * r);
  const double cos_coef = 2.0 * r * r - 1.0;
  // Signal part s = a + b cos(varphi) + c sin(varphi), per tag.
  const double b_coef = -amp * std::sin(m.signal.theta);
  const double c_coef = amp * (1.0 - 2.0 * w) * std::cos(m.signal.theta);
  const double cp = std::cos(varphi), sp = std::sin(varphi);
  const double f = v.f_phys;

  std::vector<double> g_phi(events_.size()), g_f(events_.size()), h_pp(events_.size()), h_pf(events_.size()),
      h_ff(events_.size());
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const ConvolvedBasis& bs = basis_[i];
    const double sign = events_[i].tag == Flavor::B0 ? 1.0 : -1.0;
    const double a = (bs.exp + cos_coef * bs.cos) / (2.0 * norm);
    const double b = b_coef * bs.sin / (2.0 * norm);
    const double c = sign * c_coef * bs.sin / (2.0 * norm);
    const double s = a + b * cp + c * sp;
    const double s1 = -b * sp + c * cp;
    const double s2 = -b * cp - c * sp;
    const double bk = bs.bkg / (2.0 * m.background.tau_bkg);
    const double p = f * s + (1.0 - f) * bk;
    check_density(p, i, varphi);
    const double ds = s - bk;
    g_phi[i] = -f * s1 / p;
    g_f[i] = -ds / p;
    h_pp[i] = f * f * s1 * s1 / (p * p) - f * s2 / p;
    h_pf[i] = ds * f * s1 / (p * p) - s1 / p;
    h_ff[i] = ds * ds / (p * p);
  }
  LocalExpansion out;
  out.value = value;
  const double wf = widths_.f_phys;
  out.d_phi = pairwise_sum(std::move(g_phi));
  out.d_f = pairwise_sum(std::move(g_f)) + (f - nominal_.f_phys) / (wf * wf);
  out.d_phi_phi = pairwise_sum(std::move(h_pp));
  out.d_phi_f = pairwise_sum(std::move(h_pf));
  out.d_f_f = pairwise_sum(std::move(h_ff)) + 1.0 / (wf * wf);
  return out;
}

double Likelihood::operator()(double varphi, const NuisanceValues& v) const {
  return data_term(varphi, v) + constraint_term(v, nominal_, widths_);
}

double nll(const Dataset& data, double varphi, const NuisanceValues& v, const ObservableModel& model,
           const ConstraintWidths& widths) {
  return Likelihood(data, model, widths)(varphi, v);
}

}  // namespace wvamp
