#include <exception>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "leakscope/errors.hpp"
#include "leakscope/matrix_io.hpp"
#include "leakscope/pipeline.hpp"
#include "leakscope/validate.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "leakscope: Shannon-leakage estimation for probabilistic programs"};
  app.require_subcommand(0, 1);

  std::string file;
  std::string mode = "hybrid";
  std::string bias = "general";
  leakscope::AnalysisConfig cfg;
  bool emit_matrix = false;
  bool no_ats = false;
  bool no_known_prior = false;

  app.add_option("file", file, "program to analyze (.hyleak)");
  app.add_option("--mode", mode, "precise | statistical | hybrid")
      ->capture_default_str();
  app.add_option("--samples", cfg.total_samples, "total sample budget")
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "master RNG seed")->capture_default_str();
  app.add_option("--alpha", cfg.alpha, "significance level")
      ->capture_default_str();
  app.add_option("--realloc", cfg.realloc_fraction,
                 "re-allocation batch fraction")
      ->capture_default_str();
  app.add_option("--trace-cap", cfg.trace_cap,
                 "precise-state budget before giving up")
      ->capture_default_str();
  app.add_option("--step-cap", cfg.step_cap, "per-run step budget")
      ->capture_default_str();
  app.add_option("--timeout", cfg.timeout_seconds, "wall-clock limit, seconds")
      ->capture_default_str();
  app.add_flag("--matrix", emit_matrix, "print the joint matrix as CSV");
  app.add_option("--cfg-dot", cfg.cfg_dot_path,
                 "write the control flow graph (DOT)");
  app.add_option("--json", cfg.json_path, "write the JSON report");
  app.add_option("--pp", cfg.pp_path, "write the annotated program (.pp)");
  app.add_option("--trace-csv", cfg.trace_csv_path,
                 "dump exact trace outcomes as CSV");
  app.add_flag("--no-ats", no_ats,
               "disable abstraction-then-sampling components");
  app.add_flag("--no-known-prior", no_known_prior,
               "statistical mode: ignore the declared prior");
  app.add_option("--bias", bias,
                 "bias correction: general | corollary (comparison mode)")
      ->capture_default_str();

  auto* validate_cmd =
      app.add_subcommand("validate", "run the benchmark fixture suite");
  std::string fixtures_dir = "fixtures";
  validate_cmd->add_option("--fixtures", fixtures_dir, "fixture directory")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate_cmd->parsed()) {
      leakscope::AnalysisConfig base = cfg;
      base.use_ats = !no_ats;
      base.known_prior = !no_known_prior;
      const leakscope::ValidationSummary summary =
          leakscope::validate(fixtures_dir, base);
      std::cout << summary.to_text();
      return summary.all_pass() ? 0 : 1;
    }
    if (file.empty()) {
      std::cerr << app.help();
      return 2;
    }
    cfg.mode = leakscope::parse_mode(mode);
    cfg.use_ats = !no_ats;
    cfg.known_prior = !no_known_prior;
    cfg.emit_matrix = emit_matrix;
    if (bias == "general")
      cfg.bias_mode = leakscope::BiasMode::General;
    else if (bias == "corollary")
      cfg.bias_mode = leakscope::BiasMode::Corollary;
    else
      throw leakscope::AnalysisError("unknown bias mode '" + bias + "'");

    const leakscope::RunReport report = leakscope::run(file, cfg);
    std::cout << report.to_text();
    if (emit_matrix && report.matrix) {
      std::cout << "joint matrix (rows = secrets, columns = observables):\n";
      leakscope::write_matrix_csv(std::cout, *report.matrix);
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
