#include "wvamp/commands.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "wvamp/errors.hpp"
#include "wvamp/lifetime.hpp"

namespace wvamp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg = kPi / 180.0;

std::string num(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

fs::path prepare_out(const RunConfig& cfg) {
  const fs::path dir(cfg.io.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  std::ofstream f(dir / "resolved_config.json", std::ios::binary);
  if (!f) throw ConfigError("cannot write into " + dir.string());
  f << to_json(cfg).dump(2) << '\n';
  return dir;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + p.string());
  return f;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

void write_json(const fs::path& p, const json& j) {
  auto f = open_out(p);
  f << j.dump(2) << '\n';
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

int cmd_lifetime(const RunConfig& cfg, std::ostream& log) {
  const fs::path dir = prepare_out(cfg);
  const MesonParams mp = cfg.meson();
  const MixingParams mix = cfg.mixing();
  const LifetimeGrid& g = cfg.run.lifetime;
  auto out = open_out(dir / "lifetime.csv");
  out << "abs_r,theta_deg,tau_eff,ratio\n";
  double best = 0.0, best_r = 0.0, best_theta = 0.0;
  for (double r : linspace(g.abs_r_min, g.abs_r_max, g.abs_r_steps)) {
    for (double th : linspace(g.theta_deg_min, g.theta_deg_max, g.theta_steps)) {
      const LifetimeResult lt = effective_lifetime(Postselection::from_polar(r, th * kDeg), Flavor::B0, mp, mix);
      out << num(r) << ',' << num(th) << ',' << num(lt.tau_eff) << ',' << num(lt.amplification_ratio) << '\n';
      if (lt.amplification_ratio > best) {
        best = lt.amplification_ratio;
        best_r = r;
        best_theta = th;
      }
    }
  }
  log << "max tau_eff/tau = " << best << " at |r| = " << best_r << ", theta = " << best_theta << " deg\n";
  return kExitOk;
}

int cmd_pdf(const RunConfig& cfg, std::ostream& log) {
  const fs::path dir = prepare_out(cfg);
  const ObservableModel model = cfg.model();
  const PdfGrid& g = cfg.run.pdf;
  const std::vector<double> ts = linspace(g.t_min, g.t_max, g.points);
  const double w = model.detector.effective_wrong_tag();
  const double b0 = cfg.run.b0_fraction;

  const ResolutionConvolver conv(model.resolution, model.signal.tau, model.signal.delta_m,
                                 model.background.tau_bkg, g.t_min, g.t_max);
  const SignalShape s_b0 = signal_shape(Flavor::B0, model.signal, w);
  const SignalShape s_b0bar = signal_shape(Flavor::B0bar, model.signal, w);

  auto pdf = open_out(dir / "pdf.csv");
  auto convolved = open_out(dir / "convolved.csv");
  pdf << "delta_t,pdf_B0,pdf_B0bar,pdf_bkg,pdf_total\n";
  convolved << "delta_t,conv_B0,conv_B0bar,conv_bkg\n";
  for (double t : ts) {
    const ConvolvedBasis b = conv.evaluate(t);
    const double c0 = combine(b, s_b0, model.background, model.detector.f_phys);
    const double c1 = combine(b, s_b0bar, model.background, model.detector.f_phys);
    const double cb = b.bkg / (2.0 * model.background.tau_bkg);
    pdf << num(t) << ',' << num(signal_pdf(t, Flavor::B0, model.signal)) << ','
        << num(signal_pdf(t, Flavor::B0bar, model.signal)) << ',' << num(background_pdf(t, model.background)) << ','
        << num(b0 * c0 + (1.0 - b0) * c1) << '\n';
    convolved << num(t) << ',' << num(c0) << ',' << num(c1) << ',' << num(cb) << '\n';
  }

  // Conditional densities of the postselected decay for a sweep of |r|.
  const MesonParams mp = cfg.meson();
  const MixingParams mix = cfg.mixing();
  const double theta = cfg.postselection().theta();
  auto cond = open_out(dir / "conditional.csv");
  cond << "delta_t";
  for (double r : g.conditional_abs_r) cond << ",abs_r_" << num(r);
  cond << '\n';
  for (double t : linspace(0.0, g.t_max, (g.points + 1) / 2)) {
    cond << num(t);
    for (double r : g.conditional_abs_r)
      cond << ',' << num(conditional_pdf_equalwidth(t, Postselection::from_polar(r, theta), Flavor::B0, mp, mix));
    cond << '\n';
  }
  log << "wrote " << ts.size() << " rows to " << (dir / "pdf.csv").string() << '\n';
  return kExitOk;
}

int cmd_generate(const RunConfig& cfg, std::ostream& log) {
  const fs::path dir = prepare_out(cfg);
  const EnsembleConfig ec = cfg.ensemble();
  std::vector<Dataset> sets(ec.n_experiments);
  parallel_for(ec.n_experiments, cfg.run.threads,
               [&](std::size_t i) { sets[i] = run_experiment(ec, static_cast<std::uint32_t>(i)); });
  const bool binary = cfg.io.format == "binary";
  const fs::path file = dir / (binary ? "dataset.bin" : "dataset.csv");
  if (binary) save_binary(file.string(), sets);
  else save_csv(file.string(), sets);
  std::size_t events = 0;
  for (const Dataset& d : sets) events += d.events.size();
  const std::string hash = dataset_hash(sets);
  write_json(dir / "generate.json",
             {{"file", file.filename().string()}, {"experiments", sets.size()}, {"events", events}, {"hash", hash}});
  log << "generated " << events << " events in " << sets.size() << " experiments, hash " << hash << '\n';
  return kExitOk;
}

int cmd_fit(const RunConfig& cfg, const std::string& data_path, std::ostream& log) {
  if (data_path.empty()) throw ConfigError("fit needs a dataset (--data)");
  const fs::path dir = prepare_out(cfg);
  std::vector<Dataset> sets;
  try {
    sets = load_datasets(data_path);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (sets.empty()) throw ConfigError("dataset " + data_path + " contains no events");
  const Fitter fitter(cfg.model(), cfg.constraints, cfg.fit_options());
  std::vector<FitResult> results(sets.size());
  parallel_for(sets.size(), cfg.run.threads, [&](std::size_t i) { results[i] = fitter.minimize(sets[i]); });

  json arr = json::array();
  bool all_converged = true;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    json j = to_json(results[i]);
    j["experiment_id"] = sets[i].experiment_id;
    j["n_events"] = sets[i].events.size();
    arr.push_back(j);
    all_converged = all_converged && results[i].converged;
  }
  write_json(dir / "fit.json", sets.size() == 1 ? arr[0] : json{{"results", arr}});
  for (std::size_t i = 0; i < sets.size(); ++i)
    log << "experiment " << sets[i].experiment_id << ": varphi = " << results[i].varphi_hat / kDeg << " deg"
        << (results[i].converged ? "" : " (not converged)") << '\n';
  return all_converged ? kExitOk : kExitNotConverged;
}

int cmd_ensemble(const RunConfig& cfg, std::ostream& log) {
  const fs::path dir = prepare_out(cfg);
  const EnsembleConfig ec = cfg.ensemble();
  const Fitter fitter(ec.model, cfg.constraints, cfg.fit_options());
  const EnsembleResult res = run_ensemble(ec, fitter, cfg.run.threads);
  const double truth = ec.model.signal.varphi;

  auto csv = open_out(dir / "ensemble.csv");
  csv << "experiment_id,converged,varphi_hat_deg,err_profile_deg,pull,nll_min\n";
  std::vector<double> pulls, hats;
  for (const EnsembleEntry& e : res.entries) {
    const double pull = wrap_angle(e.fit.varphi_hat - truth) / e.fit.varphi_err_profile;
    csv << e.experiment_id << ',' << (e.failed ? 0 : 1) << ',' << num(e.fit.varphi_hat / kDeg) << ','
        << num(e.fit.varphi_err_profile / kDeg) << ',' << num(pull) << ',' << num(e.fit.nll_min) << '\n';
    if (e.failed) continue;
    hats.push_back(e.fit.varphi_hat);
    if (std::isfinite(pull)) pulls.push_back(pull);
  }
  double mean = 0.0, width = 0.0;
  for (double p : pulls) mean += p;
  if (!pulls.empty()) mean /= static_cast<double>(pulls.size());
  for (double p : pulls) width += (p - mean) * (p - mean);
  if (pulls.size() > 1) width = std::sqrt(width / static_cast<double>(pulls.size() - 1));
  const double spread = angular_spread(hats, truth);
  write_json(dir / "ensemble_summary.json", {{"n_experiments", res.entries.size()},
                                             {"n_failed", res.n_failed},
                                             {"pull_mean", finite_or_null(mean)},
                                             {"pull_width", finite_or_null(width)},
                                             {"varphi_spread_deg", finite_or_null(spread / kDeg)}});
  log << "ensemble: " << res.entries.size() << " experiments, " << res.n_failed << " failed, pull mean " << mean
      << ", pull width " << width << '\n';
  return kExitOk;
}

int cmd_scan(const RunConfig& cfg, std::ostream& log) {
  const fs::path dir = prepare_out(cfg);
  const EnsembleConfig ec = cfg.ensemble();
  ScanOptions opt;
  opt.fit = cfg.fit_options();
  opt.fit.compute_profile = false;
  opt.widths = cfg.constraints;
  opt.threads = cfg.run.threads;
  const GridSpec grid = cfg.scan_grid();
  const ScanResult res = scan(grid, ec, opt);
  {
    auto csv = open_out(dir / "scan.csv");
    write_scan_csv(csv, res);
  }
  json flagged = json::array();
  for (const ScanPoint& p : res.points)
    if (p.flagged) flagged.push_back({{"abs_r", p.abs_r}, {"theta_deg", p.theta / kDeg}, {"n_failed", p.n_failed}});
  write_json(dir / "scan_summary.json",
             {{"points", res.points.size()}, {"experiments_per_point", ec.n_experiments}, {"flagged", flagged}});
  for (const ScanPoint& p : res.points)
    log << "|r| = " << p.abs_r << ", theta = " << p.theta / kDeg << " deg: total " << p.err_total / kDeg
        << " deg, stat " << p.err_stat / kDeg << " deg" << (p.flagged ? " [FLAGGED]" : "") << '\n';
  return kExitOk;
}

int run_guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericFailure& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace wvamp
