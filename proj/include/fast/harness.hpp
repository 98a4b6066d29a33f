#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fast/fast.hpp"
#include "fast/mapping.hpp"
#include "fast/sim.hpp"

namespace fast {

enum class ModelName { tight_binding_chain, spinless_hubbard_chain, custom };
enum class Boundary { open, periodic };
/// Operator family a request runs over. Anticommutator and general requests
/// always use c_a and c_b^dag.
enum class TargetSet { all, density, current };

std::string to_string(ModelName name);
std::string to_string(Boundary boundary);
std::string to_string(TargetSet targets);

struct ModelSpec {
  ModelName name = ModelName::spinless_hubbard_chain;
  unsigned n = 2;
  double t_hop = 1.0;
  double U = 0.0;
  double mu = 0.0;
  Boundary boundary = Boundary::open;
  std::vector<Hamiltonian::Term> custom_terms;  // custom models only, on n qubits

  void validate() const;
  /// -t_hop sum (c_i^dag c_{i+1} + h.c.) + U sum n_i n_{i+1} - mu sum n_i.
  /// Periodic chains add the bond (n, 1) when n >= 3.
  FermionOperator fermion_operator() const;
};

Hamiltonian build_hamiltonian(const ModelSpec& spec, MappingKind mapping);

/// A and B operator lists for a request.
std::pair<std::vector<OperatorTarget>, std::vector<OperatorTarget>> request_targets(
    const ModelSpec& spec, CorrelationKind kind, TargetSet targets);

struct OracleEntry {
  std::vector<unsigned> indices;
  double t = 0.0;
  Complex commutator = 0.0;      // tr(rho [A(t), B])
  Complex anticommutator = 0.0;  // tr(rho {A(t), B})
  Complex product = 0.0;         // tr(rho A(t) B)
  Complex value = 0.0;           // same convention as CorrelationEstimate::value
};

struct OracleResult {
  double ground_energy = 0.0;
  StateVector ground_state;
  double residual = 0.0;  // max |H psi - E psi|
  std::vector<OracleEntry> entries;  // time-major, then a-major
  std::vector<std::string> warnings;
};

/// Lowest-index eigenvector of the dense Hamiltonian, with a warning when the
/// ground space is degenerate.
OracleResult ground_state(const ModelSpec& spec, MappingKind mapping);

OracleResult oracle_correlations(const ModelSpec& spec, MappingKind mapping, CorrelationKind kind,
                                 TargetSet targets, const std::vector<double>& times);

struct ExperimentConfig {
  ModelSpec model;
  MappingKind mapping = MappingKind::JW;
  CorrelationKind kind = CorrelationKind::commutator;
  double eps = 0.1;
  double delta = 0.05;
  TargetSet targets = TargetSet::all;
  std::vector<double> times;
  std::uint64_t seed = 0;
  ShotTable shots;
  EstimationMode mode = EstimationMode::sampled;
  Strategy strategy = Strategy::automatic;
  std::string output_path;
  double check_fraction = 0.95;
  std::size_t max_workers = 0;

  void validate() const;
  EngineOptions engine_options() const;
};

/// Parses and validates a config document. Errors raise ConfigError.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::string& path);

/// Per-estimator log line: protocol, shots, circuits, wall time.
struct RunLog {
  std::string protocol;
  double t = 0.0;
  std::uint64_t shots = 0;
  std::uint64_t circuits = 0;
  double wall_seconds = 0.0;
};

struct ExperimentRow {
  CorrelationEstimate estimate;
  Complex oracle = 0.0;
  double error = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  OracleResult oracle;
  std::vector<ExperimentRow> rows;
  std::vector<RunLog> log;
  std::vector<std::string> warnings;
  double max_abs_error = 0.0;
  double fraction_within_eps = 0.0;

  bool passed() const { return fraction_within_eps >= config.check_fraction; }
};

/// Runs the estimator for every requested time and compares with the oracle.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// header: indices,t,re,im,stderr,shots,circuits,strategy
std::string to_csv(const ExperimentResult& result);
std::string to_json(const ExperimentResult& result);
std::string report_text(const ExperimentResult& result);
std::string oracle_csv(const OracleResult& oracle);

struct ArtifactPaths {
  std::string csv;
  std::string json;
  std::string report;
  std::string log;
};

/// Writes <stem>.csv, <stem>.json, <stem>.report.txt and <stem>.log.csv.
ArtifactPaths write_artifacts(const ExperimentResult& result, const std::string& stem);
void write_text(const std::string& path, const std::string& text);

struct ScalingStudy {
  std::string label;
  CorrelationKind kind = CorrelationKind::commutator;
  Strategy strategy = Strategy::automatic;
  MappingKind mapping = MappingKind::JW;
  double expected_exponent = 0.0;
};

struct ScalingConfig {
  ModelSpec model;  // n is replaced by each sweep value
  std::vector<unsigned> n_values;
  std::vector<ScalingStudy> studies;
  double eps = 0.1;
  double t = 0.5;
  std::uint64_t seed = 0;
  ShotTable shots;
  EstimationMode mode = EstimationMode::analytic;
  std::string output_path;
  double tolerance = 0.3;

  void validate() const;
};

ScalingConfig parse_scaling_config(std::string_view json_text);
ScalingConfig load_scaling_config(const std::string& path);

struct ScalingPoint {
  std::string label;
  unsigned n = 0;
  std::string strategy;
  std::uint64_t circuits = 0;
  std::uint64_t fermionic_circuits = 0;
  std::uint64_t closed_physical = 0;  // 0 for data-dependent strategies
  std::uint64_t closed_fermionic = 0;
  std::uint64_t shots = 0;
  double wall_seconds = 0.0;
};

struct ScalingFit {
  std::string label;
  double slope = 0.0;
  double expected = 0.0;
  bool within = false;
  bool counts_match = true;
};

struct ScalingReport {
  std::vector<ScalingPoint> points;
  std::vector<ScalingFit> fits;

  bool passed() const;
};

/// Least-squares slope of log y against log x. Needs >= 3 distinct x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

ScalingReport scaling_study(const ScalingConfig& config);
std::string scaling_csv(const ScalingReport& report);
std::string scaling_table(const ScalingReport& report);

}  // namespace fast
