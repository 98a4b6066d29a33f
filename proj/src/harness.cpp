#include "fast/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "fast/errors.hpp"
#include "json.hpp"

namespace fast {
namespace {

using nlohmann::json;

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string join_indices(const std::vector<unsigned>& ix) {
  std::string out;
  for (std::size_t k = 0; k < ix.size(); ++k) {
    if (k) out += '-';
    out += std::to_string(ix[k]);
  }
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// JSON field access

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

double get_number(const json& obj, const char* key, double fallback, bool required = false) {
  if (!obj.contains(key)) {
    if (required) throw ConfigError(std::string("missing required key '") + key + "'");
    return fallback;
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(std::string("'") + key + "' must be finite");
  return x;
}

std::uint64_t get_count(const json& v, const std::string& what) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) throw ConfigError(what + " must be non-negative");
  throw ConfigError(what + " must be an integer");
}

std::string get_string(const json& obj, const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

ModelName parse_model_name(const std::string& text) {
  const std::string s = lower(text);
  if (s == "tight_binding_chain") return ModelName::tight_binding_chain;
  if (s == "spinless_hubbard_chain") return ModelName::spinless_hubbard_chain;
  if (s == "custom") return ModelName::custom;
  throw ConfigError("unknown model '" + text + "'");
}

Boundary parse_boundary(const std::string& text) {
  const std::string s = lower(text);
  if (s == "open") return Boundary::open;
  if (s == "periodic") return Boundary::periodic;
  throw ConfigError("unknown boundary '" + text + "' (expected open|periodic)");
}

TargetSet parse_targets(const std::string& text) {
  const std::string s = lower(text);
  if (s == "all") return TargetSet::all;
  if (s == "density") return TargetSet::density;
  if (s == "current") return TargetSet::current;
  throw ConfigError("unknown target set '" + text + "' (expected all|density|current)");
}

ModelSpec parse_model(const json& j, bool require_n) {
  check_keys(j, {"name", "n", "t_hop", "U", "mu", "boundary", "hamiltonian"}, "model");
  ModelSpec spec;
  spec.name = parse_model_name(get_string(j, "name", "spinless_hubbard_chain"));
  if (j.contains("n")) {
    const auto n = get_count(j.at("n"), "model.n");
    if (n > 64) throw CapacityError("model.n = " + std::to_string(n) + " is out of range");
    spec.n = static_cast<unsigned>(n);
  } else if (require_n) {
    throw ConfigError("missing required key 'model.n'");
  }
  spec.t_hop = get_number(j, "t_hop", 1.0);
  spec.U = get_number(j, "U", 0.0);
  spec.mu = get_number(j, "mu", 0.0);
  spec.boundary = parse_boundary(get_string(j, "boundary", "open"));
  if (j.contains("hamiltonian")) {
    const auto& terms = j.at("hamiltonian");
    if (!terms.is_array()) throw ConfigError("model.hamiltonian must be a list of terms");
    for (const auto& term : terms) {
      check_keys(term, {"pauli", "coeff"}, "model.hamiltonian term");
      if (!term.contains("pauli") || !term.at("pauli").is_string()) {
        throw ConfigError("hamiltonian term needs a 'pauli' string");
      }
      PauliString p;
      try {
        p = PauliString::parse(term.at("pauli").get<std::string>());
      } catch (const std::exception& e) {
        throw ConfigError(std::string("bad hamiltonian term: ") + e.what());
      }
      Complex c = 0.0;
      const auto& cj = term.contains("coeff") ? term.at("coeff") : json(1.0);
      if (cj.is_number()) {
        c = cj.get<double>();
      } else if (cj.is_array() && cj.size() == 2 && cj[0].is_number() && cj[1].is_number()) {
        c = Complex(cj[0].get<double>(), cj[1].get<double>());
      } else {
        throw ConfigError("hamiltonian coefficient must be a number or [re, im]");
      }
      c *= p.phase_value();
      if (std::abs(c.imag()) > 1e-12) {
        throw ConfigError("hamiltonian term " + term.at("pauli").get<std::string>() +
                          " is not Hermitian");
      }
      spec.custom_terms.push_back({c.real(), p.unsigned_part()});
    }
  }
  return spec;
}

ShotTable parse_shots(const json& j) {
  ShotTable shots;
  if (j.is_number()) {
    const auto n = get_count(j, "shots");
    shots = {n, n, n, n, n};
  } else if (j.is_object()) {
    check_keys(j, {"per_circuit", "shadow", "bell", "anchor", "chain"}, "shots");
    const std::pair<const char*, std::uint64_t*> fields[] = {
        {"per_circuit", &shots.per_circuit}, {"shadow", &shots.shadow}, {"bell", &shots.bell},
        {"anchor", &shots.anchor},           {"chain", &shots.chain}};
    for (const auto& [key, slot] : fields) {
      if (j.contains(key)) *slot = get_count(j.at(key), std::string("shots.") + key);
    }
  } else {
    throw ConfigError("shots must be an integer or an object");
  }
  return shots;
}

std::uint64_t parse_seed(const json& j) {
  if (!j.contains("seed")) throw ConfigError("missing required key 'seed' (runs must be reproducible)");
  return get_count(j.at("seed"), "seed");
}

json parse_document(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

Eigen::MatrixXcd dense_operator(const FermionOperator& op, const MajoranaBasis& basis) {
  return to_dense(encode(op, basis), basis.qubits());
}

}  // namespace

// ---------------------------------------------------------------------------
// Models

std::string to_string(ModelName name) {
  switch (name) {
    case ModelName::tight_binding_chain: return "tight_binding_chain";
    case ModelName::spinless_hubbard_chain: return "spinless_hubbard_chain";
    case ModelName::custom: return "custom";
  }
  return "?";
}

std::string to_string(Boundary boundary) { return boundary == Boundary::open ? "open" : "periodic"; }

std::string to_string(TargetSet targets) {
  switch (targets) {
    case TargetSet::all: return "all";
    case TargetSet::density: return "density";
    case TargetSet::current: return "current";
  }
  return "?";
}

void ModelSpec::validate() const {
  if (n < 1) throw ConfigError("model needs at least one mode");
  if (n > kMaxSimQubits) {
    throw CapacityError("n = " + std::to_string(n) + " exceeds the dense simulation limit of " +
                        std::to_string(kMaxSimQubits) + " modes");
  }
  for (double x : {t_hop, U, mu}) {
    if (!std::isfinite(x)) throw ConfigError("model parameters must be finite");
  }
  if (name == ModelName::custom) {
    if (custom_terms.empty()) throw ConfigError("custom model requires explicit hamiltonian terms");
    for (const auto& term : custom_terms) {
      if (term.string.qubits() != n) {
        throw ConfigError("hamiltonian term " + term.string.to_string() + " does not act on " +
                          std::to_string(n) + " qubits");
      }
      if (!term.string.is_hermitian()) throw ConfigError("custom hamiltonian term is not Hermitian");
    }
    return;
  }
  if (!custom_terms.empty()) throw ConfigError("hamiltonian terms are only allowed for custom models");
  if (name == ModelName::tight_binding_chain && U != 0.0) {
    throw ConfigError("tight_binding_chain has no interaction; use spinless_hubbard_chain for U != 0");
  }
}

FermionOperator ModelSpec::fermion_operator() const {
  validate();
  if (name == ModelName::custom) throw ConfigError("custom models have no fermionic form");
  FermionOperator op(n);
  std::vector<std::pair<unsigned, unsigned>> bonds;
  for (unsigned i = 1; i < n; ++i) bonds.emplace_back(i, i + 1);
  if (boundary == Boundary::periodic && n >= 3) bonds.emplace_back(n, 1);
  for (const auto& [i, j] : bonds) {
    op += (FermionOperator::hopping(n, i, j) + FermionOperator::hopping(n, j, i)) * (-t_hop);
    if (U != 0.0) op += FermionOperator::number(n, i) * FermionOperator::number(n, j) * U;
  }
  for (unsigned i = 1; i <= n && mu != 0.0; ++i) op += FermionOperator::number(n, i) * (-mu);
  return op;
}

Hamiltonian build_hamiltonian(const ModelSpec& spec, MappingKind mapping) {
  spec.validate();
  if (spec.name == ModelName::custom) return Hamiltonian(spec.n, spec.custom_terms);
  Hamiltonian h(spec.n);
  for (const auto& term : encode(spec.fermion_operator(), majorana_basis(spec.n, mapping))) {
    if (std::abs(term.coeff.imag()) > 1e-12) {
      throw ContractError("model Hamiltonian encoded with a complex coefficient");
    }
    h.add(term.coeff.real(), term.string);
  }
  return h;
}

std::pair<std::vector<OperatorTarget>, std::vector<OperatorTarget>> request_targets(
    const ModelSpec& spec, CorrelationKind kind, TargetSet targets) {
  if (kind != CorrelationKind::commutator) {
    if (targets != TargetSet::all) {
      throw ConfigError(to_string(kind) + " requests run over c_a, c_b^dag; targets must be 'all'");
    }
    return {annihilation_targets(spec.n), creation_targets(spec.n)};
  }
  switch (targets) {
    case TargetSet::all: {
      auto ops = hopping_targets(spec.n);
      return {ops, ops};
    }
    case TargetSet::density: {
      auto ops = density_targets(spec.n);
      return {ops, ops};
    }
    case TargetSet::current: {
      if (spec.n < 2) throw ConfigError("current targets need n >= 2");
      auto ops = current_targets(spec.n, spec.t_hop, spec.boundary == Boundary::periodic);
      return {ops, ops};
    }
  }
  throw ConfigError("unknown target set");
}

// ---------------------------------------------------------------------------
// Oracle

OracleResult ground_state(const ModelSpec& spec, MappingKind mapping) {
  spec.validate();
  if (spec.n > 12) throw CapacityError("dense oracle limited to n <= 12 modes");
  const Eigen::MatrixXcd h = build_hamiltonian(spec, mapping).dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  if (solver.info() != Eigen::Success) throw ContractError("dense diagonalization failed");
  OracleResult out;
  out.ground_energy = solver.eigenvalues()[0];
  const Eigen::VectorXcd psi = solver.eigenvectors().col(0);
  out.residual = (h * psi - out.ground_energy * psi).cwiseAbs().maxCoeff();
  if (out.residual > 1e-8) {
    throw ContractError("ground state residual " + number(out.residual) + " exceeds 1e-8");
  }
  if (solver.eigenvalues().size() > 1 && solver.eigenvalues()[1] - solver.eigenvalues()[0] < 1e-8) {
    out.warnings.push_back("degenerate ground space; using the lowest-index eigenvector");
  }
  out.ground_state = StateVector(spec.n, psi);
  return out;
}

OracleResult oracle_correlations(const ModelSpec& spec, MappingKind mapping, CorrelationKind kind,
                                 TargetSet targets, const std::vector<double>& times) {
  OracleResult out = ground_state(spec, mapping);
  const auto [a_ops, b_ops] = request_targets(spec, kind, targets);
  const MajoranaBasis basis = majorana_basis(spec.n, mapping);
  std::vector<Eigen::MatrixXcd> a_dense, b_dense;
  for (const auto& a : a_ops) a_dense.push_back(dense_operator(a.op, basis));
  for (const auto& b : b_ops) b_dense.push_back(dense_operator(b.op, basis));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(build_hamiltonian(spec, mapping).dense());
  const Eigen::MatrixXcd& v = solver.eigenvectors();
  const Eigen::VectorXcd& psi = out.ground_state.amplitudes();
  for (double t : times) {
    Eigen::VectorXcd phase(v.cols());
    for (Eigen::Index k = 0; k < phase.size(); ++k) {
      phase[k] = std::exp(Complex(0.0, -solver.eigenvalues()[k] * t));
    }
    const Eigen::MatrixXcd u = v * phase.asDiagonal() * v.adjoint();
    // tr(rho A(t) B) = <U psi| A U |B psi>, tr(rho B A(t)) = <U B^dag psi| A |U psi>.
    const Eigen::VectorXcd u_psi = u * psi;
    std::vector<Eigen::VectorXcd> b_right, b_left;
    for (const auto& b : b_dense) {
      b_right.push_back(u * (b * psi));
      b_left.push_back(u * (b.adjoint() * psi));
    }
    for (std::size_t ai = 0; ai < a_ops.size(); ++ai) {
      const Eigen::VectorXcd a_u_psi_dag = a_dense[ai].adjoint() * u_psi;
      for (std::size_t bi = 0; bi < b_ops.size(); ++bi) {
        OracleEntry e;
        e.indices = a_ops[ai].label;
        e.indices.insert(e.indices.end(), b_ops[bi].label.begin(), b_ops[bi].label.end());
        e.t = t;
        const Complex ab = a_u_psi_dag.dot(b_right[bi]);
        const Complex ba = b_left[bi].dot(a_dense[ai] * u_psi);
        e.product = ab;
        e.commutator = ab - ba;
        e.anticommutator = ab + ba;
        switch (kind) {
          case CorrelationKind::commutator: e.value = Complex(0, -1) * step(t) * e.commutator; break;
          case CorrelationKind::anticommutator:
            e.value = Complex(0, -1) * step(t) * e.anticommutator;
            break;
          case CorrelationKind::general: e.value = e.product; break;
        }
        out.entries.push_back(std::move(e));
      }
    }
  }
  return out;
}

std::string oracle_csv(const OracleResult& oracle) {
  std::string out = "indices,t,re,im,commutator_re,commutator_im,anticommutator_re,anticommutator_im\n";
  for (const auto& e : oracle.entries) {
    out += join_indices(e.indices) + ',' + number(e.t) + ',' + number(e.value.real()) + ',' +
           number(e.value.imag()) + ',' + number(e.commutator.real()) + ',' +
           number(e.commutator.imag()) + ',' + number(e.anticommutator.real()) + ',' +
           number(e.anticommutator.imag()) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiments

void ExperimentConfig::validate() const {
  model.validate();
  if (!(eps > 0.0)) throw ConfigError("request.eps must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("request.delta must lie in (0, 1)");
  if (times.empty()) throw ConfigError("times must not be empty");
  for (double t : times) {
    if (!std::isfinite(t)) throw ConfigError("times must be finite");
  }
  if (!(check_fraction >= 0.0 && check_fraction <= 1.0)) {
    throw ConfigError("check_fraction must lie in [0, 1]");
  }
  shots.validate();
  (void)request_targets(model, kind, targets);
  if (model.n > 12) throw CapacityError("dense oracle limited to n <= 12 modes");
  const RegimeChoice choice = choose_regime(model.n, eps, mapping, kind);
  const Strategy s = strategy == Strategy::automatic ? choice.strategy : strategy;
  if ((s == Strategy::bell_mmc || s == Strategy::chained) && 2 * model.n > kMaxSimQubits) {
    throw CapacityError("strategy " + to_string(s) + " needs 2n <= " +
                        std::to_string(kMaxSimQubits) + " qubits; n = " + std::to_string(model.n));
  }
}

EngineOptions ExperimentConfig::engine_options() const {
  EngineOptions opt;
  opt.mapping = mapping;
  opt.eps = eps;
  opt.delta = delta;
  opt.mode = mode;
  opt.strategy = strategy;
  opt.shots = shots;
  opt.seed = seed;
  opt.max_workers = max_workers;
  return opt;
}

ExperimentConfig parse_config(std::string_view json_text) {
  const json j = parse_document(json_text);
  check_keys(j,
             {"model", "mapping", "request", "times", "seed", "shots", "mode", "strategy",
              "output_path", "check_fraction"},
             "config");
  ExperimentConfig cfg;
  if (!j.contains("model")) throw ConfigError("missing required key 'model'");
  cfg.model = parse_model(j.at("model"), true);
  try {
    cfg.mapping = parse_mapping(get_string(j, "mapping", "jw"));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (!j.contains("request")) throw ConfigError("missing required key 'request'");
  const json& req = j.at("request");
  check_keys(req, {"kind", "eps", "delta", "targets"}, "request");
  cfg.kind = parse_kind(get_string(req, "kind", "commutator"));
  cfg.eps = get_number(req, "eps", 0.1);
  cfg.delta = get_number(req, "delta", 0.05);
  cfg.targets = parse_targets(get_string(req, "targets", "all"));
  if (!j.contains("times") || !j.at("times").is_array()) throw ConfigError("times must be a list");
  for (const auto& t : j.at("times")) {
    if (!t.is_number()) throw ConfigError("times must be numbers");
    cfg.times.push_back(t.get<double>());
  }
  cfg.seed = parse_seed(j);
  if (j.contains("shots")) cfg.shots = parse_shots(j.at("shots"));
  cfg.mode = parse_mode(get_string(j, "mode", "sampled"));
  cfg.strategy = parse_strategy(get_string(j, "strategy", "auto"));
  cfg.output_path = get_string(j, "output_path", "");
  cfg.check_fraction = get_number(j, "check_fraction", 0.95);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult out;
  out.config = config;
  out.oracle = oracle_correlations(config.model, config.mapping, config.kind, config.targets,
                                   config.times);
  out.warnings = out.oracle.warnings;
  const EvolutionCache evolution(build_hamiltonian(config.model, config.mapping));
  const auto [a_ops, b_ops] = request_targets(config.model, config.kind, config.targets);
  const StateVector& rho = out.oracle.ground_state;
  const std::size_t per_time = a_ops.size() * b_ops.size();

  std::size_t within = 0;
  for (std::size_t ti = 0; ti < config.times.size(); ++ti) {
    const double t = config.times[ti];
    EngineOptions opt = config.engine_options();
    opt.seed = derive_seed(config.seed, ti);
    const auto start = std::chrono::steady_clock::now();
    const CorrelationMatrix mat =
        config.kind == CorrelationKind::general
            ? general_correlations(rho, evolution, config.model.n, t, opt)
            : estimate_correlations(config.kind, a_ops, b_ops, rho, evolution, t, opt);
    const double wall = seconds_since(start);
    out.log.push_back({to_string(mat.choice.strategy), t, mat.shots_total, mat.circuits_total, wall});
    out.warnings.insert(out.warnings.end(), mat.warnings.begin(), mat.warnings.end());
    for (std::size_t k = 0; k < per_time; ++k) {
      ExperimentRow row;
      row.estimate = mat.entries[k];
      row.oracle = out.oracle.entries[ti * per_time + k].value;
      row.error = std::abs(row.estimate.value - row.oracle);
      out.max_abs_error = std::max(out.max_abs_error, row.error);
      within += row.error <= config.eps;
      out.rows.push_back(std::move(row));
    }
  }
  out.fraction_within_eps =
      out.rows.empty() ? 0.0 : static_cast<double>(within) / static_cast<double>(out.rows.size());
  return out;
}

std::string to_csv(const ExperimentResult& result) {
  std::string out = "indices,t,re,im,stderr,shots,circuits,strategy\n";
  for (const auto& row : result.rows) {
    const auto& e = row.estimate;
    out += join_indices(e.indices) + ',' + number(e.t) + ',' + number(e.value.real()) + ',' +
           number(e.value.imag()) + ',' + number(e.stderr) + ',' + std::to_string(e.shots_total) +
           ',' + std::to_string(e.circuits_total) + ',' + to_string(e.strategy) + '\n';
  }
  return out;
}

std::string to_json(const ExperimentResult& result) {
  const auto& cfg = result.config;
  json doc;
  doc["model"] = {{"name", to_string(cfg.model.name)},
                  {"n", cfg.model.n},
                  {"t_hop", cfg.model.t_hop},
                  {"U", cfg.model.U},
                  {"mu", cfg.model.mu},
                  {"boundary", to_string(cfg.model.boundary)}};
  doc["mapping"] = to_string(cfg.mapping);
  doc["request"] = {{"kind", to_string(cfg.kind)},
                    {"eps", cfg.eps},
                    {"delta", cfg.delta},
                    {"targets", to_string(cfg.targets)}};
  doc["seed"] = cfg.seed;
  doc["mode"] = cfg.mode == EstimationMode::analytic ? "analytic" : "sampled";
  doc["shots"] = {{"per_circuit", cfg.shots.per_circuit}, {"shadow", cfg.shots.shadow},
                  {"bell", cfg.shots.bell},               {"anchor", cfg.shots.anchor},
                  {"chain", cfg.shots.chain}};
  doc["ground_energy"] = result.oracle.ground_energy;
  json rows = json::array();
  for (const auto& row : result.rows) {
    const auto& e = row.estimate;
    json branches = json::array();
    for (const auto& b : e.branches) {
      branches.push_back({{"n_plus", b.n_plus},
                          {"n_minus", b.n_minus},
                          {"chosen", to_string(b.chosen)},
                          {"c_plus_sq", b.c_plus_sq_hat},
                          {"c_minus_sq", b.c_minus_sq_hat}});
    }
    rows.push_back({{"indices", e.indices},
                    {"t", e.t},
                    {"value", complex_json(e.value)},
                    {"raw", complex_json(e.raw)},
                    {"stderr", e.stderr},
                    {"oracle", complex_json(row.oracle)},
                    {"error", row.error},
                    {"shots", e.shots_total},
                    {"circuits", e.circuits_total},
                    {"strategy", to_string(e.strategy)},
                    {"regime", to_string(e.regime)},
                    {"branches", branches}});
  }
  doc["entries"] = rows;
  json runs = json::array();
  for (const auto& l : result.log) {
    runs.push_back({{"t", l.t}, {"strategy", l.protocol}, {"shots", l.shots}, {"circuits", l.circuits}});
  }
  doc["runs"] = runs;
  doc["summary"] = {{"max_abs_error", result.max_abs_error},
                    {"fraction_within_eps", result.fraction_within_eps},
                    {"check_fraction", cfg.check_fraction},
                    {"passed", result.passed()}};
  doc["warnings"] = result.warnings;
  return doc.dump(2) + "\n";
}

std::string report_text(const ExperimentResult& result) {
  const auto& cfg = result.config;
  std::ostringstream os;
  os << "request        " << to_string(cfg.kind) << " (" << to_string(cfg.targets) << ")\n";
  os << "model          " << to_string(cfg.model.name) << " n=" << cfg.model.n
     << " t_hop=" << number(cfg.model.t_hop) << " U=" << number(cfg.model.U)
     << " mu=" << number(cfg.model.mu) << " " << to_string(cfg.model.boundary) << "\n";
  os << "mapping        " << to_string(cfg.mapping) << "\n";
  os << "strategy       " << (result.log.empty() ? "-" : result.log.front().protocol) << "\n";
  os << "entries        " << result.rows.size() << " over " << cfg.times.size() << " time(s)\n";
  os << "max |error|    " << number(result.max_abs_error) << "\n";
  os << "within eps     " << number(result.fraction_within_eps) << " (eps=" << number(cfg.eps)
     << ")\n";
  os << "check          " << (result.passed() ? "PASS" : "FAIL") << " (need "
     << number(cfg.check_fraction) << ")\n";
  for (const auto& w : result.warnings) os << "warning        " << w << "\n";
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::error_code ec;
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  if (ec) throw IoError("cannot create directory " + parent.string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path);
}

ArtifactPaths write_artifacts(const ExperimentResult& result, const std::string& stem) {
  if (stem.empty()) throw IoError("no output path given");
  ArtifactPaths paths{stem + ".csv", stem + ".json", stem + ".report.txt", stem + ".log.csv"};
  write_text(paths.csv, to_csv(result));
  write_text(paths.json, to_json(result));
  write_text(paths.report, report_text(result));
  std::string log = "protocol,t,shots,circuits,wall_seconds\n";
  for (const auto& l : result.log) {
    log += l.protocol + ',' + number(l.t) + ',' + std::to_string(l.shots) + ',' +
           std::to_string(l.circuits) + ',' + number(l.wall_seconds) + '\n';
  }
  write_text(paths.log, log);
  return paths;
}

// ---------------------------------------------------------------------------
// Scaling

void ScalingConfig::validate() const {
  std::set<unsigned> distinct(n_values.begin(), n_values.end());
  if (distinct.size() < 3) {
    throw DomainError("a scaling fit needs at least 3 distinct n values");
  }
  if (studies.empty()) throw ConfigError("scaling sweep lists no studies");
  if (model.name == ModelName::custom) throw ConfigError("scaling sweeps need a chain model");
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (!std::isfinite(t)) throw ConfigError("t must be finite");
  shots.validate();
  for (unsigned n : n_values) {
    ModelSpec spec = model;
    spec.n = n;
    spec.validate();
    if (n > 12) throw CapacityError("dense oracle limited to n <= 12 modes");
  }
}

ScalingConfig parse_scaling_config(std::string_view json_text) {
  const json j = parse_document(json_text);
  check_keys(j,
             {"model", "n_values", "studies", "eps", "t", "seed", "shots", "mode", "output_path",
              "tolerance"},
             "sweep");
  ScalingConfig cfg;
  cfg.model = j.contains("model") ? parse_model(j.at("model"), false) : ModelSpec{};
  if (!j.contains("n_values") || !j.at("n_values").is_array()) {
    throw ConfigError("n_values must be a list");
  }
  for (const auto& v : j.at("n_values")) {
    const auto n = get_count(v, "n_values entry");
    if (n < 1 || n > 64) throw ConfigError("n_values entries must lie in [1, 64]");
    cfg.n_values.push_back(static_cast<unsigned>(n));
  }
  if (!j.contains("studies") || !j.at("studies").is_array()) throw ConfigError("studies must be a list");
  for (const auto& s : j.at("studies")) {
    check_keys(s, {"label", "kind", "strategy", "mapping", "expected_exponent"}, "study");
    ScalingStudy study;
    study.kind = parse_kind(get_string(s, "kind", "commutator"));
    if (study.kind == CorrelationKind::general) throw ConfigError("scaling studies run fast1 or fast2");
    study.strategy = parse_strategy(get_string(s, "strategy", "auto"));
    try {
      study.mapping = parse_mapping(get_string(s, "mapping", "jw"));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    study.expected_exponent = get_number(s, "expected_exponent", 0.0, true);
    study.label = get_string(s, "label",
                             (study.kind == CorrelationKind::commutator ? "fast1_" : "fast2_") +
                                 to_string(study.mapping) + "_" + to_string(study.strategy));
    cfg.studies.push_back(study);
  }
  cfg.eps = get_number(j, "eps", 0.1);
  cfg.t = get_number(j, "t", 0.5);
  cfg.seed = parse_seed(j);
  if (j.contains("shots")) cfg.shots = parse_shots(j.at("shots"));
  cfg.mode = parse_mode(get_string(j, "mode", "analytic"));
  cfg.output_path = get_string(j, "output_path", "");
  cfg.tolerance = get_number(j, "tolerance", 0.3);
  cfg.validate();
  return cfg;
}

ScalingConfig load_scaling_config(const std::string& path) {
  return parse_scaling_config(read_file(path));
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DimensionError("slope fit needs paired samples");
  std::set<double> distinct(x.begin(), x.end());
  if (distinct.size() < 3) throw DomainError("a scaling fit needs at least 3 distinct points");
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0 && y[k] > 0.0)) throw DomainError("log-log fit needs positive values");
    mx += std::log(x[k]);
    my += std::log(y[k]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = std::log(x[k]) - mx;
    sxy += dx * (std::log(y[k]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

bool ScalingReport::passed() const {
  return std::all_of(fits.begin(), fits.end(), [](const ScalingFit& f) { return f.within && f.counts_match; });
}

ScalingReport scaling_study(const ScalingConfig& config) {
  config.validate();
  ScalingReport report;
  for (std::size_t si = 0; si < config.studies.size(); ++si) {
    const ScalingStudy& study = config.studies[si];
    std::vector<double> xs, ys;
    ScalingFit fit;
    fit.label = study.label;
    fit.expected = study.expected_exponent;
    for (unsigned n : config.n_values) {
      ModelSpec spec = config.model;
      spec.n = n;
      const OracleResult gs = ground_state(spec, study.mapping);
      const EvolutionCache evolution(build_hamiltonian(spec, study.mapping));
      const auto [a_ops, b_ops] = request_targets(spec, study.kind, TargetSet::all);
      EngineOptions opt;
      opt.mapping = study.mapping;
      opt.eps = config.eps;
      opt.mode = config.mode;
      opt.strategy = study.strategy;
      opt.shots = config.shots;
      opt.seed = derive_seed(config.seed, si, n);
      const auto start = std::chrono::steady_clock::now();
      const CorrelationMatrix mat =
          estimate_correlations(study.kind, a_ops, b_ops, gs.ground_state, evolution, config.t, opt);
      ScalingPoint p;
      p.label = study.label;
      p.n = n;
      p.strategy = to_string(mat.choice.strategy);
      p.circuits = mat.circuits_total;
      p.fermionic_circuits = mat.fermionic_circuits;
      p.shots = mat.shots_total;
      p.wall_seconds = seconds_since(start);
      const Strategy layout =
          mat.choice.strategy == Strategy::brute_force ? Strategy::nm : mat.choice.strategy;
      const CircuitCounts closed = closed_form_circuits(layout, study.kind, mat.b_components,
                                                        mat.b_count, mat.family_size, mat.a_count,
                                                        mat.colors);
      p.closed_physical = closed.physical;
      p.closed_fermionic = closed.fermionic;
      if (closed.physical != 0) {
        fit.counts_match = fit.counts_match && closed.physical == p.circuits &&
                           closed.fermionic == p.fermionic_circuits;
      }
      xs.push_back(n);
      ys.push_back(static_cast<double>(p.fermionic_circuits));
      report.points.push_back(p);
    }
    fit.slope = loglog_slope(xs, ys);
    fit.within = std::abs(fit.slope - fit.expected) <= config.tolerance;
    report.fits.push_back(fit);
  }
  return report;
}

std::string scaling_csv(const ScalingReport& report) {
  std::string out =
      "study,n,strategy,circuits,fermionic_circuits,closed_physical,closed_fermionic,shots\n";
  for (const auto& p : report.points) {
    out += p.label + ',' + std::to_string(p.n) + ',' + p.strategy + ',' + std::to_string(p.circuits) +
           ',' + std::to_string(p.fermionic_circuits) + ',' + std::to_string(p.closed_physical) +
           ',' + std::to_string(p.closed_fermionic) + ',' + std::to_string(p.shots) + '\n';
  }
  return out;
}

std::string scaling_table(const ScalingReport& report) {
  std::ostringstream os;
  os << "study                      slope   expected  result\n";
  for (const auto& f : report.fits) {
    char line[160];
    std::snprintf(line, sizeof line, "%-26s %6.3f  %8.3f  %s%s\n", f.label.c_str(), f.slope,
                  f.expected, f.within ? "ok" : "off", f.counts_match ? "" : " (count mismatch)");
    os << line;
  }
  return os.str();
}

}  // namespace fast
