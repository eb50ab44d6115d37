#include "wvamp/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "wvamp/errors.hpp"

namespace wvamp {

using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg = kPi / 180.0;

// Reads keys from one JSON object and rejects any key it was not asked about.
class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_ + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& dst) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      dst = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
  }

  template <typename T>
  void get_optional(const char* key, std::optional<T>& dst) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return;
    T v{};
    get(key, v);
    dst = v;
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  std::string path(const char* key) const { return path_ + "." + key; }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown key " + path_ + "." + it.key());
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

Complex parse_complex(const json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw ConfigError(path + " must be a number or a [re, im] pair");
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

YieldMode parse_yield_mode(const std::string& s) {
  if (s == "fixed") return YieldMode::Fixed;
  if (s == "poisson") return YieldMode::Poisson;
  throw ConfigError("run.yield_mode must be \"fixed\" or \"poisson\"");
}

template <typename F>
void guarded(F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

RunConfig parse_config(const json& doc) {
  RunConfig c;
  Reader root(doc, "config");

  if (const json* j = root.child("physics")) {
    Reader r(*j, "physics");
    r.get("mass_per_ps", c.physics.mass);
    r.get("tau_ps", c.physics.tau);
    r.get("delta_m_per_ps", c.physics.delta_m);
    r.get("delta_gamma_per_ps", c.physics.delta_gamma);
    r.get("abs_p", c.physics.abs_p);
    r.get("varphi_deg", c.physics.varphi_deg);
    r.finish();
  }
  if (const json* j = root.child("selection")) {
    Reader r(*j, "selection");
    r.get("abs_r", c.selection.abs_r);
    r.get("theta_deg", c.selection.theta_deg);
    if (const json* m = r.child("decay_mode"); m && !m->is_null()) {
      Reader d(*m, "selection.decay_mode");
      Complex xi1{1.0}, xi2{}, eta1{1.0}, eta2{};
      const std::pair<const char*, Complex*> fields[] = {{"xi1", &xi1}, {"xi2", &xi2}, {"eta1", &eta1}, {"eta2", &eta2}};
      for (const auto& [key, dst] : fields) {
        if (const json* v = d.child(key)) *dst = parse_complex(*v, d.path(key));
      }
      d.finish();
      guarded([&] { c.selection.decay_mode = DecayModeSpec(xi1, xi2, eta1, eta2); });
    }
    r.finish();
  }
  if (const json* j = root.child("detector")) {
    Reader r(*j, "detector");
    r.get("f_phys", c.detector.f_phys);
    r.get("wrong_tag", c.detector.wrong_tag);
    r.get("apply_wrong_tag", c.detector.apply_wrong_tag);
    r.get("n_bb", c.detector.n_bb);
    r.get("br_upsilon", c.detector.br_upsilon);
    r.get("br_signal", c.detector.br_signal);
    r.get("br_kstar", c.detector.br_kstar);
    r.get("br_ks", c.detector.br_ks);
    r.get("eff_tag", c.detector.eff_tag);
    r.get("eff_reco", c.detector.eff_reco);
    r.get("tau_bkg_ps", c.background.tau_bkg);
    if (const json* res = r.child("resolution")) {
      Reader q(*res, "detector.resolution");
      q.get("mu_ps", c.resolution.mu);
      q.get("sigma_ps", c.resolution.sigma);
      q.get("alpha_L", c.resolution.alpha_L);
      q.get("alpha_H", c.resolution.alpha_H);
      q.get("n_L", c.resolution.n_L);
      q.get("n_H", c.resolution.n_H);
      q.finish();
    }
    r.finish();
  }
  if (const json* j = root.child("constraints")) {
    Reader r(*j, "constraints");
    r.get("f_phys", c.constraints.f_phys);
    r.get("mu_ps", c.constraints.mu);
    r.get("sigma_ps", c.constraints.sigma);
    r.finish();
  }
  if (const json* j = root.child("run")) {
    Reader r(*j, "run");
    RunSettings& s = c.run;
    r.get("seed", s.seed);
    r.get("threads", s.threads);
    r.get("n_experiments", s.n_experiments);
    r.get("events_per_experiment", s.events_per_experiment);
    std::string mode = s.yield_mode == YieldMode::Fixed ? "fixed" : "poisson";
    r.get("yield_mode", mode);
    s.yield_mode = parse_yield_mode(mode);
    r.get_optional("poisson_mean", s.poisson_mean);
    r.get("b0_fraction", s.b0_fraction);
    r.get("restarts", s.restarts);
    r.get("compute_profile", s.compute_profile);
    r.get("full_scan", s.full_scan);
    r.get("scan_abs_r", s.scan_abs_r);
    r.get("scan_theta_deg", s.scan_theta_deg);
    if (const json* g = r.child("lifetime_grid")) {
      Reader q(*g, "run.lifetime_grid");
      q.get("abs_r_min", s.lifetime.abs_r_min);
      q.get("abs_r_max", s.lifetime.abs_r_max);
      q.get("abs_r_steps", s.lifetime.abs_r_steps);
      q.get("theta_deg_min", s.lifetime.theta_deg_min);
      q.get("theta_deg_max", s.lifetime.theta_deg_max);
      q.get("theta_steps", s.lifetime.theta_steps);
      q.finish();
    }
    if (const json* g = r.child("pdf_grid")) {
      Reader q(*g, "run.pdf_grid");
      q.get("t_min_ps", s.pdf.t_min);
      q.get("t_max_ps", s.pdf.t_max);
      q.get("points", s.pdf.points);
      q.get("conditional_abs_r", s.pdf.conditional_abs_r);
      q.finish();
    }
    r.finish();
  }
  if (const json* j = root.child("io")) {
    Reader r(*j, "io");
    r.get("out_dir", c.io.out_dir);
    r.get("format", c.io.format);
    r.finish();
  }
  root.finish();
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config " + path);
  json doc;
  try {
    f >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

MesonParams RunConfig::meson() const {
  return MesonParams::from_averages(physics.mass, 1.0 / physics.tau, physics.delta_m, physics.delta_gamma);
}

MixingParams RunConfig::mixing() const { return MixingParams::from_polar(physics.abs_p, physics.varphi_deg * kDeg); }

Postselection RunConfig::postselection() const {
  if (selection.decay_mode) return postselection_from_mode(*selection.decay_mode);
  return Postselection::from_polar(selection.abs_r, selection.theta_deg * kDeg);
}

ObservableModel RunConfig::model() const {
  if (std::abs(physics.abs_p - std::sqrt(0.5)) > 1e-9)
    throw ConfigError("the observable model assumes |p| = |q|; set physics.abs_p to 1/sqrt(2)");
  if (physics.delta_gamma != 0.0) throw ConfigError("the observable model assumes delta_gamma = 0");
  const Postselection post = postselection();
  ObservableModel m;
  m.signal.tau = physics.tau;
  m.signal.delta_m = physics.delta_m;
  m.signal.abs_r = post.abs_r();
  m.signal.theta = post.theta();
  m.signal.varphi = physics.varphi_deg * kDeg;
  m.resolution = resolution;
  m.background = background;
  m.detector = detector;
  return m;
}

EnsembleConfig RunConfig::ensemble() const {
  EnsembleConfig e;
  e.n_experiments = run.n_experiments;
  e.events_per_experiment = run.events_per_experiment;
  e.yield_mode = run.yield_mode;
  e.poisson_mean = run.poisson_mean ? *run.poisson_mean : expected_yield(detector);
  e.b0_fraction = run.b0_fraction;
  e.seed = run.seed;
  e.model = model();
  return e;
}

GridSpec RunConfig::scan_grid() const {
  if (run.full_scan) return GridSpec::standard();
  GridSpec g;
  g.abs_r = run.scan_abs_r;
  for (double t : run.scan_theta_deg) g.theta.push_back(t * kDeg);
  return g;
}

FitOptions RunConfig::fit_options() const {
  FitOptions o;
  o.restarts = run.restarts;
  o.seed = run.seed;
  o.compute_profile = run.compute_profile;
  o.start_varphi = physics.varphi_deg * kDeg;
  return o;
}

void RunConfig::validate() const {
  guarded([&] {
    if (!(physics.tau > 0.0)) throw ConfigError("physics.tau_ps must be positive");
    if (!(physics.delta_m >= 0.0)) throw ConfigError("physics.delta_m_per_ps must be non-negative");
    (void)meson();
    (void)mixing();
    (void)postselection();
    detector.validate();
    resolution.validate();
    background.validate();
    constraints.validate();
    if (run.threads < 1) throw ConfigError("run.threads must be at least 1");
    if (run.n_experiments < 1) throw ConfigError("run.n_experiments must be at least 1");
    if (!(run.b0_fraction >= 0.0 && run.b0_fraction <= 1.0)) throw ConfigError("run.b0_fraction must lie in [0, 1]");
    if (run.restarts < 0) throw ConfigError("run.restarts must be non-negative");
    if (run.poisson_mean && !(*run.poisson_mean >= 0.0)) throw ConfigError("run.poisson_mean must be non-negative");
    if (run.lifetime.abs_r_steps < 1 || run.lifetime.theta_steps < 1)
      throw ConfigError("run.lifetime_grid steps must be at least 1");
    if (!(run.pdf.t_min < run.pdf.t_max) || run.pdf.points < 2)
      throw ConfigError("run.pdf_grid needs t_min_ps < t_max_ps and at least 2 points");
    if (io.format != "csv" && io.format != "binary") throw ConfigError("io.format must be \"csv\" or \"binary\"");
    scan_grid().validate();
  });
}

json to_json(const RunConfig& c) {
  json j;
  j["physics"] = {{"mass_per_ps", c.physics.mass},       {"tau_ps", c.physics.tau},
                  {"delta_m_per_ps", c.physics.delta_m}, {"delta_gamma_per_ps", c.physics.delta_gamma},
                  {"abs_p", c.physics.abs_p},            {"varphi_deg", c.physics.varphi_deg}};
  json sel = {{"abs_r", c.selection.abs_r}, {"theta_deg", c.selection.theta_deg}};
  if (c.selection.decay_mode) {
    const DecayModeSpec& m = *c.selection.decay_mode;
    sel["decay_mode"] = {{"xi1", complex_json(m.xi1())},
                         {"xi2", complex_json(m.xi2())},
                         {"eta1", complex_json(m.eta1())},
                         {"eta2", complex_json(m.eta2())}};
  }
  j["selection"] = sel;
  j["detector"] = {{"f_phys", c.detector.f_phys},
                   {"wrong_tag", c.detector.wrong_tag},
                   {"apply_wrong_tag", c.detector.apply_wrong_tag},
                   {"n_bb", c.detector.n_bb},
                   {"br_upsilon", c.detector.br_upsilon},
                   {"br_signal", c.detector.br_signal},
                   {"br_kstar", c.detector.br_kstar},
                   {"br_ks", c.detector.br_ks},
                   {"eff_tag", c.detector.eff_tag},
                   {"eff_reco", c.detector.eff_reco},
                   {"tau_bkg_ps", c.background.tau_bkg},
                   {"resolution",
                    {{"mu_ps", c.resolution.mu},
                     {"sigma_ps", c.resolution.sigma},
                     {"alpha_L", c.resolution.alpha_L},
                     {"alpha_H", c.resolution.alpha_H},
                     {"n_L", c.resolution.n_L},
                     {"n_H", c.resolution.n_H}}}};
  j["constraints"] = {
      {"f_phys", c.constraints.f_phys}, {"mu_ps", c.constraints.mu}, {"sigma_ps", c.constraints.sigma}};
  const RunSettings& s = c.run;
  j["run"] = {{"seed", s.seed},
              {"threads", s.threads},
              {"n_experiments", s.n_experiments},
              {"events_per_experiment", s.events_per_experiment},
              {"yield_mode", s.yield_mode == YieldMode::Fixed ? "fixed" : "poisson"},
              {"poisson_mean", s.poisson_mean ? json(*s.poisson_mean) : json(expected_yield(c.detector))},
              {"b0_fraction", s.b0_fraction},
              {"restarts", s.restarts},
              {"compute_profile", s.compute_profile},
              {"full_scan", s.full_scan},
              {"scan_abs_r", s.scan_abs_r},
              {"scan_theta_deg", s.scan_theta_deg},
              {"lifetime_grid",
               {{"abs_r_min", s.lifetime.abs_r_min},
                {"abs_r_max", s.lifetime.abs_r_max},
                {"abs_r_steps", s.lifetime.abs_r_steps},
                {"theta_deg_min", s.lifetime.theta_deg_min},
                {"theta_deg_max", s.lifetime.theta_deg_max},
                {"theta_steps", s.lifetime.theta_steps}}},
              {"pdf_grid",
               {{"t_min_ps", s.pdf.t_min},
                {"t_max_ps", s.pdf.t_max},
                {"points", s.pdf.points},
                {"conditional_abs_r", s.pdf.conditional_abs_r}}}};
  j["io"] = {{"out_dir", c.io.out_dir}, {"format", c.io.format}};
  return j;
}

}  // namespace wvamp
