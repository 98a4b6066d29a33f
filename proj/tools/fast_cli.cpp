// fast run|oracle|scaling <config.json>
//
// Exit codes: 0 success, 1 validation error, 2 capacity error,
// 3 comparison failure under --check, 4 I/O error.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "fast/errors.hpp"
#include "fast/harness.hpp"

namespace {

enum Exit { kOk = 0, kValidation = 1, kCapacity = 2, kCheckFailed = 3, kIo = 4 };

int run(const std::string& path, const std::string& output, bool check) {
  const fast::ExperimentConfig cfg = fast::load_config(path);
  const fast::ExperimentResult result = fast::run_experiment(cfg);
  const std::string stem = output.empty() ? cfg.output_path : output;
  for (const auto& l : result.log) {
    std::cerr << "log," << l.protocol << ',' << l.t << ',' << l.shots << ',' << l.circuits << ','
              << l.wall_seconds << '\n';
  }
  if (stem.empty()) {
    std::cout << fast::to_csv(result);
    std::cerr << fast::report_text(result);
  } else {
    const auto paths = fast::write_artifacts(result, stem);
    std::cout << fast::report_text(result);
    std::cout << "wrote " << paths.csv << ", " << paths.json << ", " << paths.report << '\n';
  }
  return check && !result.passed() ? kCheckFailed : kOk;
}

int oracle(const std::string& path, const std::string& output) {
  const fast::ExperimentConfig cfg = fast::load_config(path);
  const fast::OracleResult res = fast::oracle_correlations(cfg.model, cfg.mapping, cfg.kind,
                                                           cfg.targets, cfg.times);
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
  const std::string stem = output.empty() ? cfg.output_path : output;
  if (stem.empty()) {
    std::cout << fast::oracle_csv(res);
  } else {
    fast::write_text(stem + ".oracle.csv", fast::oracle_csv(res));
    std::cout << "ground energy " << res.ground_energy << "\nwrote " << stem << ".oracle.csv\n";
  }
  return kOk;
}

int scaling(const std::string& path, const std::string& output, bool check) {
  const fast::ScalingConfig cfg = fast::load_scaling_config(path);
  const fast::ScalingReport report = fast::scaling_study(cfg);
  const std::string stem = output.empty() ? cfg.output_path : output;
  std::cout << fast::scaling_table(report);
  if (stem.empty()) {
    std::cout << '\n' << fast::scaling_csv(report);
  } else {
    fast::write_text(stem + ".csv", fast::scaling_csv(report));
    fast::write_text(stem + ".txt", fast::scaling_table(report));
    std::cout << "wrote " << stem << ".csv, " << stem << ".txt\n";
  }
  return check && !report.passed() ? kCheckFailed : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fermionic correlation estimation with shadow-style measurements"};
  app.require_subcommand(1);
  std::string config, output;
  bool check = false;

  auto* run_cmd = app.add_subcommand("run", "estimate correlations and compare with the oracle");
  run_cmd->add_option("config", config, "experiment config (JSON)")->required();
  run_cmd->add_option("-o,--output", output, "output stem (overrides output_path)");
  run_cmd->add_flag("--check", check, "exit 3 unless enough entries are within eps");

  auto* oracle_cmd = app.add_subcommand("oracle", "exact correlations by dense diagonalization");
  oracle_cmd->add_option("config", config, "experiment config (JSON)")->required();
  oracle_cmd->add_option("-o,--output", output, "output stem (overrides output_path)");

  auto* scaling_cmd = app.add_subcommand("scaling", "circuit-count sweep over n");
  scaling_cmd->add_option("config", config, "sweep config (JSON)")->required();
  scaling_cmd->add_option("-o,--output", output, "output stem (overrides output_path)");
  scaling_cmd->add_flag("--check", check, "exit 3 if a fitted exponent is off");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kValidation;
  }

  try {
    if (*run_cmd) return run(config, output, check);
    if (*oracle_cmd) return oracle(config, output);
    return scaling(config, output, check);
  } catch (const fast::CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << '\n';
    return kCapacity;
  } catch (const fast::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const fast::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kValidation;
  } catch (const std::domain_error& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }
}
