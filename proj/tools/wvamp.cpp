#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "wvamp/commands.hpp"
#include "wvamp/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Decay-time simulation and fitting for postselected neutral-meson decays"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out_dir;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--seed", seed, "Master seed (overrides run.seed)");
  app.add_option("--threads", threads, "Worker threads (overrides run.threads)")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "Output directory (overrides io.out_dir)");

  auto* lifetime = app.add_subcommand("lifetime", "Tabulate the effective lifetime over (|r|, theta)");
  auto* pdf = app.add_subcommand("pdf", "Tabulate signal, background and convolved densities");
  auto* generate = app.add_subcommand("generate", "Generate pseudo-experiment datasets");
  auto* fit = app.add_subcommand("fit", "Fit varphi to a dataset");
  std::string data_path;
  fit->add_option("--data", data_path, "Dataset file (.csv or .bin)")->required();
  auto* scan = app.add_subcommand("scan", "Uncertainty of varphi over a grid of postselections");
  bool full_grid = false;
  scan->add_flag("--full-grid", full_grid, "Use the full 9 x 11 grid");
  auto* ensemble = app.add_subcommand("ensemble", "Generate and fit an ensemble at one postselection");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : wvamp::kExitConfig;
  }

  return wvamp::run_guarded(std::cerr, [&]() -> int {
    wvamp::RunConfig cfg = config_path.empty() ? wvamp::parse_config(nlohmann::json::object())
                                               : wvamp::load_config(config_path);
    if (seed) cfg.run.seed = *seed;
    if (threads) cfg.run.threads = *threads;
    if (!out_dir.empty()) cfg.io.out_dir = out_dir;
    if (full_grid) cfg.run.full_scan = true;
    cfg.validate();

    if (lifetime->parsed()) return wvamp::cmd_lifetime(cfg, std::cout);
    if (pdf->parsed()) return wvamp::cmd_pdf(cfg, std::cout);
    if (generate->parsed()) return wvamp::cmd_generate(cfg, std::cout);
    if (fit->parsed()) return wvamp::cmd_fit(cfg, data_path, std::cout);
    if (scan->parsed()) return wvamp::cmd_scan(cfg, std::cout);
    if (ensemble->parsed()) return wvamp::cmd_ensemble(cfg, std::cout);
    return wvamp::kExitConfig;
  });
}
