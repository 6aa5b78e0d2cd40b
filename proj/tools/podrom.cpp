// podrom: POD reduced-order model sweeps on the FitzHugh–Nagumo presets.
//
//   podrom run --preset A [--config FILE] [--out DIR] [--methods Y,Z] [--deltas d1,d2]
//              [--epsilons e1,e2] [--dims l1,l2] [--bounds] [--plots] [--seed N]
//   podrom spectrum --preset B --delta 0.04 [--methods Y,Z] [--out DIR]
//
// Exit status: 0 all cells succeeded, 2 some cells failed, 1 bad configuration.
// PODROM_OUT_DIR overrides the output directory unless --out is given.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "podrom/podrom.hpp"

namespace {

constexpr const char* kConfigHelp =
    "Config file keys (key = value):\n"
    "  [run]  preset, methods, deltas, epsilons, dims, final_time, eval_grid_size,\n"
    "         rel_tol, abs_tol, out, bounds, plots, seed, rank_tol_factor,\n"
    "         bound_samples, method2_coefficient (conservative|literal)\n"
    "  [fhn]  L, X, D1, D2, lambda, a, mu, gamma, stencil (consistent|literal),\n"
    "         I0, IX, w0, wX (waveforms: 'constant:c', 'sin2:amplitude' or a number)\n"
    "Command-line options override the file; the file overrides the preset.";

struct CommonOptions {
  std::string preset;
  std::string config_file;
  std::string out_dir;
  std::string methods;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

podrom::RunConfig base_config(const CommonOptions& o) {
  std::optional<podrom::IniDocument> doc;
  if (!o.config_file.empty()) doc = podrom::read_ini(o.config_file);
  std::optional<podrom::fhn::PresetId> id;
  if (doc) id = podrom::ini_preset(*doc);
  if (!o.preset.empty()) id = podrom::fhn::parse_preset(o.preset);
  podrom::RunConfig cfg;
  if (id) cfg = podrom::config_from_preset(podrom::fhn::preset(*id));
  if (doc) podrom::apply_ini(*doc, cfg);
  if (const char* env = std::getenv("PODROM_OUT_DIR"); env && *env) cfg.output_dir = env;
  if (!o.out_dir.empty()) cfg.output_dir = o.out_dir;
  if (!o.methods.empty()) cfg.methods = podrom::parse_method_list(o.methods);
  if (o.seed_given) cfg.seed = o.seed;
  return cfg;
}

void print_cells(const podrom::RunReport& r) {
  std::printf("%-6s %-10s %-12s %6s %12s %12s  %s\n", "method", "delta", "rule", "l", "sigma_next", "max_err",
              "status");
  for (const auto& c : r.cells) {
    if (c.ok)
      std::printf("%-6s %-10g %-12s %6zu %12.4e %12.4e  ok%s\n", podrom::to_string(c.method).c_str(), c.delta,
                  c.rule.label().c_str(), c.l, c.sigma_next, c.max_error,
                  c.cutoff_warning ? " (cutoff >= sigma_1, l = 1)" : "");
    else
      std::printf("%-6s %-10g %-12s %6s %12s %12s  FAILED: %s\n", podrom::to_string(c.method).c_str(), c.delta,
                  c.rule.label().c_str(), "-", "-", "-", c.failure.c_str());
  }
  const auto& t = r.timings;
  std::printf("timings [s]: truth %.3f (%d solve), svd %.3f, rom %.3f, bounds %.3f, total %.3f\n", t.fom_seconds,
              t.fom_solves, t.svd_seconds, t.rom_seconds, t.bound_seconds, t.total_seconds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"POD reduced-order models for the semidiscrete FitzHugh-Nagumo system"};
  app.footer(kConfigHelp);
  app.require_subcommand(1);

  CommonOptions run_opts;
  std::string deltas, epsilons, dims;
  bool bounds = false, plots = false;
  auto* run = app.add_subcommand("run", "sweep (method, delta, rule) cells and write CSV reports");
  run->add_option("--preset", run_opts.preset, "experiment preset A, B or C");
  run->add_option("--config", run_opts.config_file, "configuration file")->check(CLI::ExistingFile);
  run->add_option("--out", run_opts.out_dir, "output directory");
  run->add_option("--methods", run_opts.methods, "comma list of Y, Z");
  run->add_option("--deltas", deltas, "comma list of snapshot spacings");
  run->add_option("--epsilons", epsilons, "comma list of singular-value cutoffs");
  run->add_option("--dims", dims, "comma list of fixed ROM dimensions");
  run->add_flag("--bounds", bounds, "evaluate a-priori error bounds");
  run->add_flag("--plots", plots, "write a gnuplot script");
  auto* seed_opt = run->add_option("--seed", run_opts.seed, "seed for randomized starts");

  CommonOptions spec_opts;
  double spec_delta = 0.0;
  auto* spectrum = app.add_subcommand("spectrum", "print the snapshot singular values for one spacing");
  spectrum->add_option("--preset", spec_opts.preset, "experiment preset A, B or C")->required();
  spectrum->add_option("--delta", spec_delta, "snapshot spacing")->required();
  spectrum->add_option("--methods", spec_opts.methods, "comma list of Y, Z");
  spectrum->add_option("--config", spec_opts.config_file, "configuration file")->check(CLI::ExistingFile);
  spectrum->add_option("--out", spec_opts.out_dir, "also write spectrum.csv into this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      run_opts.seed_given = seed_opt->count() > 0;
      podrom::RunConfig cfg = base_config(run_opts);
      if (!deltas.empty()) cfg.deltas = podrom::parse_real_list(deltas, "--deltas");
      podrom::set_rules(cfg, epsilons.empty() ? std::nullopt : std::optional<std::string>(epsilons),
                        dims.empty() ? std::nullopt : std::optional<std::string>(dims));
      cfg.evaluate_bounds = cfg.evaluate_bounds || bounds;
      cfg.emit_plots = cfg.emit_plots || plots;
      cfg.validate();

      const podrom::RunReport report = podrom::run_experiment(cfg);
      const auto files = podrom::write_report(report, cfg.output_dir, cfg.evaluate_bounds, cfg.emit_plots);
      print_cells(report);
      std::printf("wrote %zu files to %s\n", files.size(), cfg.output_dir.c_str());
      return report.failed_cells() == 0 ? 0 : 2;
    }
    podrom::RunConfig cfg = base_config(spec_opts);
    cfg.deltas = {spec_delta};
    const podrom::RunReport report = podrom::compute_spectra(cfg);
    const std::string csv = podrom::spectrum_csv(report);
    std::fputs(csv.c_str(), stdout);
    if (!spec_opts.out_dir.empty() || std::getenv("PODROM_OUT_DIR")) {
      std::filesystem::create_directories(cfg.output_dir);
      podrom::write_spectrum_csv(report, std::filesystem::path(cfg.output_dir) / "spectrum.csv");
    }
    return 0;
  } catch (const podrom::InvalidInput& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
