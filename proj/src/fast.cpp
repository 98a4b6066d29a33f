#include "fast/fast.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>

#include "fast/errors.hpp"
#include "fast/parallel.hpp"

namespace fast {
namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

using Key = std::pair<std::uint64_t, std::uint64_t>;
Key key_of(const PauliString& p) { return {p.xbits(), p.zbits()}; }

// A fermionic operator written over the shared observable family.
struct Decomposed {
  std::vector<Complex> coeffs;
  Complex identity = 0.0;
};

struct Layout {
  CorrelationKind kind = CorrelationKind::commutator;
  Strategy strategy = Strategy::mmc;
  std::vector<PauliString> family;
  std::vector<std::vector<std::size_t>> groups;  // mmc / nm
  std::vector<int> majorana_index;               // chained: 1-based gamma index per member
  const EngineOptions* options = nullptr;
};

struct Acquired {
  SampleSet set;
  std::uint64_t circuits = 0;
  std::uint64_t shots = 0;
  std::vector<std::string> warnings;
};

struct ComponentData {
  std::array<SampleSet, 3> sets;
  double c_hat = 1.0;
  double c_var = 0.0;
  std::optional<BranchSelection> branch;
  std::uint64_t circuits = 0;
  std::uint64_t shots = 0;
  std::vector<std::string> warnings;
};

enum class Copies { one, two };
// Maps a nominal shot count to the number of usable (retained) shots.
using Retain = std::function<std::uint64_t(Copies, std::uint64_t)>;

std::vector<std::vector<std::size_t>> color_groups(const std::vector<PauliString>& family,
                                                   const std::vector<std::size_t>& subset) {
  std::vector<PauliString> members;
  members.reserve(subset.size());
  for (std::size_t k : subset) members.push_back(family[k]);
  auto classes = greedy_color(build_commutation_graph(members)).classes();
  for (auto& cls : classes) {
    for (auto& k : cls) k = subset[k];
  }
  return classes;
}

bool uses_bell(Strategy s) { return s == Strategy::bell_mmc || s == Strategy::chained; }

// Thresholds the Bell magnitudes and measures the survivors.
Acquired bell_stage(const StateVector& state, const MagnitudeTable& table, const Layout& layout,
                    Rng& rng, const Retain& retain, bool analytic) {
  const EngineOptions& opt = *layout.options;
  const std::size_t size = layout.family.size();
  const auto survivors = table.survivors();
  std::vector<bool> alive(size, false);
  for (std::size_t k : survivors) alive[k] = true;
  Acquired out;

  if (layout.strategy == Strategy::bell_mmc) {
    const auto groups = color_groups(layout.family, survivors);
    const double clique_bound = 4.0 / (opt.eps * opt.eps);
    if (static_cast<double>(groups.size()) > clique_bound + 1.0) {
      out.warnings.push_back("survivor coloring uses " + std::to_string(groups.size()) +
                             " colors, above the 4/eps^2 clique bound");
    }
    std::vector<std::uint64_t> retained(groups.size()), nominal(groups.size(), opt.shots.per_circuit);
    for (std::size_t g = 0; g < groups.size(); ++g) retained[g] = retain(Copies::one, opt.shots.per_circuit);
    if (analytic) {
      out.set = SampleSet(size);
      for (std::size_t k = 0; k < size; ++k) {
        out.set.set_fixed(k, alive[k] ? expectation(state, layout.family[k]) : 0.0);
      }
    } else {
      out.set = sample_groups(state, layout.family, groups, retained, rng, nominal);
      for (std::size_t k = 0; k < size; ++k) {
        if (!alive[k]) out.set.set_fixed(k, 0.0);
      }
    }
    out.circuits = groups.size();
    out.shots = groups.size() * opt.shots.per_circuit;
    return out;
  }

  // Chained sign recovery: odd Majoranas form the X chain, even ones the Y chain.
  std::vector<std::size_t> chain_x, chain_y;
  for (std::size_t k : survivors) {
    (layout.majorana_index[k] % 2 == 1 ? chain_x : chain_y).push_back(k);
  }
  auto order = [&](std::vector<std::size_t>& v) {
    std::sort(v.begin(), v.end(), [&](std::size_t a, std::size_t b) {
      return layout.majorana_index[a] < layout.majorana_index[b];
    });
  };
  order(chain_x);
  order(chain_y);
  out.set = SampleSet(size);
  std::vector<bool> done(size, false);
  for (const auto* chain : {&chain_x, &chain_y}) {
    if (chain->empty()) continue;
    std::vector<PauliString> members;
    for (std::size_t k : *chain) members.push_back(layout.family[k]);
    std::vector<int> signs;
    if (analytic) {
      for (const auto& p : members) signs.push_back(expectation(state, p) < 0.0 ? -1 : 1);
      out.circuits += members.size() > 1 ? 2 : 1;
      out.shots += opt.shots.anchor + (members.size() > 1 ? opt.shots.chain : 0);
    } else {
      const std::uint64_t a_ret = retain(Copies::one, opt.shots.anchor);
      const std::uint64_t c_ret = retain(Copies::two, opt.shots.chain);
      const SignChain sc = run_chain(state, members, chain == &chain_x ? "X" : "Y", opt.eps, a_ret,
                                     c_ret, rng, false, opt.shots.anchor, opt.shots.chain);
      signs = sc.recovered_signs;
      out.circuits += sc.circuits;
      out.shots += sc.shots;
      out.warnings.insert(out.warnings.end(), sc.warnings.begin(), sc.warnings.end());
    }
    for (std::size_t i = 0; i < chain->size(); ++i) {
      const std::size_t k = (*chain)[i];
      const double magnitude = analytic ? std::abs(expectation(state, layout.family[k]))
                                        : table.entries[k];
      out.set.set_fixed(k, signs[i] * magnitude, analytic ? 0.0 : table.entry_var[k]);
      done[k] = true;
    }
  }
  for (std::size_t k = 0; k < size; ++k) {
    if (!done[k]) out.set.set_fixed(k, 0.0);
  }
  return out;
}

MagnitudeTable exact_magnitudes(const StateVector& state, const std::vector<PauliString>& family,
                                double threshold) {
  MagnitudeTable table;
  table.observables = family;
  table.threshold = threshold;
  for (const auto& p : family) {
    table.entries.push_back(std::abs(expectation(state, p)));
    table.entry_var.push_back(0.0);
  }
  return table;
}

std::uint64_t circuits_for_layout(const Layout& layout) {
  switch (layout.strategy) {
    case Strategy::dc: return 1;
    default: return layout.groups.size();
  }
}

// Measurement of one state prepared without an ancilla.
Acquired acquire_plain(const StateVector& state, const Layout& layout, Rng& rng) {
  const EngineOptions& opt = *layout.options;
  const bool analytic = opt.mode == EstimationMode::analytic;
  const Retain keep = [](Copies, std::uint64_t n) { return n; };
  if (uses_bell(layout.strategy)) {
    const double threshold = 0.75 * opt.eps;
    MagnitudeTable table = analytic
                               ? exact_magnitudes(state, layout.family, threshold)
                               : magnitudes_from_bell(sample_bell(state, layout.family, opt.shots.bell, rng),
                                                      layout.family, threshold);
    Acquired out = bell_stage(state, table, layout, rng, keep, analytic);
    out.circuits += 1;
    out.shots += opt.shots.bell;
    return out;
  }
  Acquired out;
  if (layout.strategy == Strategy::dc) {
    out.set = analytic ? exact_expectations(state, layout.family)
                       : sample_shadows(state, layout.family, opt.shots.shadow, rng);
    out.circuits = 1;
    out.shots = opt.shots.shadow;
    return out;
  }
  const std::vector<std::uint64_t> shots(layout.groups.size(), opt.shots.per_circuit);
  out.set = analytic ? exact_expectations(state, layout.family)
                     : sample_groups(state, layout.family, layout.groups, shots, rng);
  out.circuits = layout.groups.size();
  out.shots = layout.groups.size() * opt.shots.per_circuit;
  return out;
}

// Measurement of the ancilla-heralded state. Branch selection uses the
// ancilla bits of the first stage: all circuits for fixed layouts, the Bell
// circuit (two ancillas per shot) for Bell-based layouts.
Acquired acquire_heralded(const StateVector& rho, const PauliString& b,
                          const EvolutionCache& evolution, double t, const Layout& layout,
                          Rng& rng, ComponentData& data) {
  const EngineOptions& opt = *layout.options;
  const bool analytic = opt.mode == EstimationMode::analytic;
  const BranchWeights w = branch_weights(rho, b);
  const bool bell = uses_bell(layout.strategy);

  if (analytic) {
    BranchSelection sel;
    sel.c_plus_sq_hat = w.plus;
    sel.c_minus_sq_hat = w.minus;
    sel.chosen = w.plus >= w.minus ? Branch::plus : Branch::minus;
    data.branch = sel;
    data.c_hat = sel.chosen_weight();
    data.c_var = 0.0;
    const StateVector state =
        branch_state(rho, b, sel.chosen == Branch::plus ? 0 : 1, evolution, t);
    return acquire_plain(state, layout, rng);
  }

  if (!bell) {
    const std::uint64_t nominal =
        layout.strategy == Strategy::dc ? opt.shots.shadow : opt.shots.per_circuit;
    const std::size_t circuits = circuits_for_layout(layout);
    std::vector<std::uint64_t> plus(circuits);
    std::uint64_t n_plus = 0;
    for (auto& k : plus) {
      k = rng.binomial(nominal, w.plus);
      n_plus += k;
    }
    const std::uint64_t total = nominal * circuits;
    const BranchSelection sel = majority_select(n_plus, total - n_plus);
    const bool take_plus = sel.chosen == Branch::plus;
    const StateVector state = branch_state(rho, b, take_plus ? 0 : 1, evolution, t);
    std::vector<std::uint64_t> retained(circuits), executed(circuits, nominal);
    for (std::size_t g = 0; g < circuits; ++g) retained[g] = take_plus ? plus[g] : nominal - plus[g];
    Acquired out;
    if (layout.strategy == Strategy::dc) {
      out.set = sample_shadows(state, layout.family, retained[0], rng, nominal);
    } else {
      out.set = sample_groups(state, layout.family, layout.groups, retained, rng, executed);
    }
    out.circuits = circuits;
    out.shots = total;
    data.branch = sel;
    data.c_hat = sel.chosen_weight();
    data.c_var = data.c_hat * (1.0 - data.c_hat) / static_cast<double>(total);
    return out;
  }

  // Bell stage on two heralded copies: each shot carries two ancilla bits.
  const double p = w.plus, q = w.minus;
  const std::vector<double> joint = {p * p, 2.0 * p * q, q * q};
  const auto pairs = rng.multinomial(opt.shots.bell, joint);
  const std::uint64_t bits_plus = 2 * pairs[0] + pairs[1];
  const std::uint64_t bits_minus = pairs[1] + 2 * pairs[2];
  const BranchSelection sel = majority_select(bits_plus, bits_minus);
  const bool take_plus = sel.chosen == Branch::plus;
  const double p_chosen = take_plus ? p : q;
  const StateVector state = branch_state(rho, b, take_plus ? 0 : 1, evolution, t);
  const std::uint64_t bell_kept = take_plus ? pairs[0] : pairs[2];
  const double threshold = 0.75 * opt.eps;
  const MagnitudeTable table = magnitudes_from_bell(
      sample_bell(state, layout.family, bell_kept, rng, opt.shots.bell), layout.family, threshold);
  const Retain retain = [&rng, p_chosen](Copies copies, std::uint64_t n) {
    return rng.binomial(n, copies == Copies::one ? p_chosen : p_chosen * p_chosen);
  };
  Acquired out = bell_stage(state, table, layout, rng, retain, false);
  out.circuits += 1;
  out.shots += opt.shots.bell;
  data.branch = sel;
  data.c_hat = sel.chosen_weight();
  data.c_var = data.c_hat * (1.0 - data.c_hat) / static_cast<double>(bits_plus + bits_minus);
  return out;
}

ComponentData run_component(const PauliString& b, const StateVector& rho,
                            const EvolutionCache& evolution, double t, const Layout& layout,
                            Rng& rng) {
  ComponentData data;
  std::array<Acquired, 3> parts;
  if (layout.kind == CorrelationKind::commutator) {
    parts[0] = acquire_plain(evolution.evolve(apply_pauli_rotation(rho, b), t), layout, rng);
  } else {
    parts[0] = acquire_heralded(rho, b, evolution, t, layout, rng, data);
  }
  parts[1] = acquire_plain(evolution.evolve(rho, t), layout, rng);
  parts[2] = acquire_plain(evolution.evolve(apply_pauli(rho, b), t), layout, rng);
  for (std::size_t k = 0; k < 3; ++k) {
    data.sets[k] = std::move(parts[k].set);
    data.circuits += parts[k].circuits;
    data.shots += parts[k].shots;
    data.warnings.insert(data.warnings.end(), parts[k].warnings.begin(), parts[k].warnings.end());
  }
  return data;
}

ExpectationPlan plan_for(CorrelationKind kind, const ComponentData& data) {
  const PauliString none(1);
  if (kind == CorrelationKind::commutator) return reformulate_commutator(none, none, 0.0);
  return reformulate_anticommutator(none, none, 0.0,
                                    data.branch ? data.branch->chosen : Branch::plus);
}

void check_modes(std::span<const OperatorTarget> ops, unsigned n, const char* what) {
  if (ops.empty()) throw DomainError(std::string("no ") + what + " targets");
  for (const auto& o : ops) {
    if (o.op.modes() != n) {
      throw DimensionError(std::string(what) + " operator acts on " +
                           std::to_string(o.op.modes()) + " modes, expected " + std::to_string(n));
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Names

std::string to_string(CorrelationKind kind) {
  switch (kind) {
    case CorrelationKind::commutator: return "commutator";
    case CorrelationKind::anticommutator: return "anticommutator";
    case CorrelationKind::general: return "general";
  }
  return "?";
}

std::string to_string(Regime regime) { return regime == Regime::small_n ? "small_n" : "large_n"; }

std::string to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::automatic: return "auto";
    case Strategy::mmc: return "mmc";
    case Strategy::dc: return "dc";
    case Strategy::nm: return "nm";
    case Strategy::bell_mmc: return "bell_mmc";
    case Strategy::chained: return "chained";
    case Strategy::brute_force: return "brute_force";
  }
  return "?";
}

std::string to_string(Branch branch) { return branch == Branch::plus ? "plus" : "minus"; }

CorrelationKind parse_kind(std::string_view text) {
  const std::string s = lower(text);
  if (s == "commutator") return CorrelationKind::commutator;
  if (s == "anticommutator") return CorrelationKind::anticommutator;
  if (s == "general") return CorrelationKind::general;
  throw ConfigError("unknown request kind '" + std::string(text) + "'");
}

Strategy parse_strategy(std::string_view text) {
  const std::string s = lower(text);
  for (Strategy st : {Strategy::automatic, Strategy::mmc, Strategy::dc, Strategy::nm,
                      Strategy::bell_mmc, Strategy::chained, Strategy::brute_force}) {
    if (s == to_string(st)) return st;
  }
  throw ConfigError("unknown strategy '" + std::string(text) + "'");
}

EstimationMode parse_mode(std::string_view text) {
  const std::string s = lower(text);
  if (s == "sampled") return EstimationMode::sampled;
  if (s == "analytic") return EstimationMode::analytic;
  throw ConfigError("unknown mode '" + std::string(text) + "' (expected sampled|analytic)");
}

// ---------------------------------------------------------------------------
// Requests and regimes

void CorrelationRequest::validate() const {
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  if (a.modes() != b.modes()) throw DimensionError("A and B act on different mode counts");
  if (!std::isfinite(t)) throw DomainError("time must be finite");
}

RegimeChoice choose_regime(unsigned n, double eps, MappingKind mapping, CorrelationKind kind) {
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  RegimeChoice out;
  out.regime = static_cast<double>(n) <= 1.0 / (eps * eps) * (1.0 + 1e-12) ? Regime::small_n
                                                                           : Regime::large_n;
  const bool small = out.regime == Regime::small_n;
  if (kind == CorrelationKind::commutator) {
    if (small) {
      out.strategy = mapping == MappingKind::TT ? Strategy::dc : Strategy::mmc;
    } else {
      out.strategy = Strategy::bell_mmc;
    }
  } else {
    if (small) {
      out.strategy = mapping == MappingKind::TT ? Strategy::dc : Strategy::nm;
    } else {
      out.strategy = mapping == MappingKind::JW ? Strategy::chained : Strategy::bell_mmc;
    }
  }
  return out;
}

BranchSelection majority_select(std::uint64_t n_plus, std::uint64_t n_minus) {
  const std::uint64_t total = n_plus + n_minus;
  if (total == 0) throw DomainError("majority rule needs at least one ancilla outcome");
  BranchSelection sel;
  sel.n_plus = n_plus;
  sel.n_minus = n_minus;
  sel.chosen = n_plus >= n_minus ? Branch::plus : Branch::minus;
  sel.c_plus_sq_hat = static_cast<double>(n_plus) / static_cast<double>(total);
  sel.c_minus_sq_hat = static_cast<double>(n_minus) / static_cast<double>(total);
  return sel;
}

BranchSelection majority_select(std::span<const int> ancilla_bits) {
  std::uint64_t zeros = 0;
  for (int b : ancilla_bits) {
    if (b != 0 && b != 1) throw DomainError("ancilla bits must be 0 or 1");
    zeros += b == 0;
  }
  return majority_select(zeros, ancilla_bits.size() - zeros);
}

// ---------------------------------------------------------------------------
// Plans

Complex ExpectationPlan::combine(Complex e1, Complex e2, Complex e3, double c_sq) const {
  const double scale = heralded ? c_sq : 1.0;
  return prefactor * (weights[0] * scale * e1 + weights[1] * e2 + weights[2] * e3);
}

namespace {

void check_plan_inputs(const PauliString& a, const PauliString& b, double t) {
  if (a.qubits() != b.qubits()) throw DimensionError("A and B act on different qubit counts");
  if (!b.is_hermitian()) {
    throw DomainError("B = " + b.to_string() + " is not involutory (B^2 != I)");
  }
  if (!std::isfinite(t)) throw DomainError("time must be finite");
}

}  // namespace

ExpectationPlan reformulate_commutator(const PauliString& a, const PauliString& b, double t) {
  check_plan_inputs(a, b, t);
  ExpectationPlan plan;
  plan.kind = CorrelationKind::commutator;
  plan.a = a;
  plan.b = b;
  plan.t = t;
  plan.prefactor = Complex(0, -1);
  plan.weights = {2.0, -1.0, -1.0};
  plan.heralded = false;
  return plan;
}

ExpectationPlan reformulate_anticommutator(const PauliString& a, const PauliString& b, double t,
                                           Branch branch) {
  check_plan_inputs(a, b, t);
  ExpectationPlan plan;
  plan.kind = CorrelationKind::anticommutator;
  plan.branch = branch;
  plan.a = a;
  plan.b = b;
  plan.t = t;
  plan.prefactor = 1.0;
  plan.weights = branch == Branch::plus ? std::array<double, 3>{4.0, -1.0, -1.0}
                                        : std::array<double, 3>{-4.0, 1.0, 1.0};
  plan.heralded = true;
  return plan;
}

StateVector plan_state(const ExpectationPlan& plan, PlanState which, const StateVector& rho,
                       const EvolutionCache& evolution) {
  switch (which) {
    case PlanState::rho1:
      if (plan.kind == CorrelationKind::commutator) {
        return evolution.evolve(apply_pauli_rotation(rho, plan.b), plan.t);
      }
      return branch_state(rho, plan.b, plan.branch == Branch::plus ? 0 : 1, evolution, plan.t);
    case PlanState::rho2: return evolution.evolve(rho, plan.t);
    case PlanState::rho3: return evolution.evolve(apply_pauli(rho, plan.b), plan.t);
  }
  throw DomainError("unknown plan state");
}

Complex evaluate_exact(const ExpectationPlan& plan, const StateVector& rho,
                       const EvolutionCache& evolution) {
  if (rho.qubits() != plan.a.qubits()) throw DimensionError("state and plan widths differ");
  double c_sq = 1.0;
  Complex e1 = 0.0;
  if (plan.heralded) {
    const BranchWeights w = branch_weights(rho, plan.b);
    c_sq = plan.branch == Branch::plus ? w.plus : w.minus;
    if (c_sq >= 1e-14) {
      e1 = expectation_value(plan_state(plan, PlanState::rho1, rho, evolution).amplitudes(), plan.a);
    }
  } else {
    e1 = expectation_value(plan_state(plan, PlanState::rho1, rho, evolution).amplitudes(), plan.a);
  }
  const Complex e2 =
      expectation_value(plan_state(plan, PlanState::rho2, rho, evolution).amplitudes(), plan.a);
  const Complex e3 =
      expectation_value(plan_state(plan, PlanState::rho3, rho, evolution).amplitudes(), plan.a);
  return plan.combine(e1, e2, e3, c_sq);
}

// ---------------------------------------------------------------------------
// Options

void ShotTable::validate() const {
  const std::pair<const char*, std::uint64_t> fields[] = {
      {"per_circuit", per_circuit}, {"shadow", shadow}, {"bell", bell},
      {"anchor", anchor},           {"chain", chain}};
  for (const auto& [name, value] : fields) {
    if (value < kMinShots) {
      throw ConfigError(std::string("shots.") + name + " = " + std::to_string(value) +
                        " is below the floor of " + std::to_string(kMinShots) + " shots per circuit");
    }
  }
}

void EngineOptions::validate() const {
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  shots.validate();
}

CircuitCounts closed_form_circuits(Strategy strategy, CorrelationKind kind, std::size_t b_components,
                                   std::size_t b_fermionic, std::size_t family_size,
                                   std::size_t a_fermionic, std::size_t colors) {
  (void)kind;
  CircuitCounts c;
  switch (strategy) {
    case Strategy::mmc:
      c.physical = 3 * b_components * colors;
      c.fermionic = 3 * b_fermionic * colors;
      break;
    case Strategy::dc:
      c.physical = 3 * b_components;
      c.fermionic = 3 * b_fermionic;
      break;
    case Strategy::nm:
    case Strategy::brute_force:
      c.physical = 3 * b_components * family_size;
      c.fermionic = 3 * b_fermionic * a_fermionic;
      break;
    default: break;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Engine

CorrelationMatrix estimate_correlations(CorrelationKind kind, std::span<const OperatorTarget> a_ops,
                                        std::span<const OperatorTarget> b_ops,
                                        const StateVector& rho, const EvolutionCache& evolution,
                                        double t, const EngineOptions& options) {
  if (kind == CorrelationKind::general) {
    throw DomainError("general correlations combine a commutator and an anticommutator run");
  }
  options.validate();
  if (!std::isfinite(t)) throw DomainError("time must be finite");
  const unsigned n = rho.qubits();
  if (evolution.qubits() != n) throw DimensionError("state and Hamiltonian widths differ");
  check_modes(a_ops, n, "A");
  check_modes(b_ops, n, "B");
  const MajoranaBasis basis = majorana_basis(n, options.mapping);

  CorrelationMatrix out;
  out.kind = kind;
  out.t = t;
  out.a_count = a_ops.size();
  out.b_count = b_ops.size();

  // Observable family shared by all A targets.
  std::vector<std::vector<PauliTerm>> a_terms;
  std::map<Key, std::size_t> family_index;
  for (const auto& a : a_ops) {
    a_terms.push_back(encode(a.op, basis));
    for (const auto& term : a_terms.back()) {
      if (!term.string.is_identity()) family_index.emplace(key_of(term.string), 0);
    }
  }
  Layout layout;
  layout.kind = kind;
  layout.options = &options;
  for (auto& [key, index] : family_index) {
    index = layout.family.size();
    layout.family.emplace_back(n, key.first, key.second);
  }
  out.family_size = layout.family.size();
  std::vector<Decomposed> a_dec(a_ops.size());
  for (std::size_t i = 0; i < a_ops.size(); ++i) {
    a_dec[i].coeffs.assign(layout.family.size(), 0.0);
    for (const auto& term : a_terms[i]) {
      if (term.string.is_identity()) {
        a_dec[i].identity += term.coeff;
      } else {
        a_dec[i].coeffs[family_index.at(key_of(term.string))] += term.coeff;
      }
    }
  }

  // Distinct B components; identity commutes with everything and is skipped
  // for commutators.
  std::map<Key, std::size_t> comp_index;
  std::vector<std::vector<PauliTerm>> b_terms;
  for (const auto& b : b_ops) {
    b_terms.push_back(encode(b.op, basis));
    for (const auto& term : b_terms.back()) {
      if (kind == CorrelationKind::commutator && term.string.is_identity()) continue;
      comp_index.emplace(key_of(term.string), 0);
    }
  }
  std::vector<PauliString> components;
  for (auto& [key, index] : comp_index) {
    index = components.size();
    components.emplace_back(n, key.first, key.second);
  }
  out.b_components = components.size();
  std::vector<std::vector<std::pair<std::size_t, Complex>>> b_dec(b_ops.size());
  for (std::size_t j = 0; j < b_ops.size(); ++j) {
    for (const auto& term : b_terms[j]) {
      const auto it = comp_index.find(key_of(term.string));
      if (it != comp_index.end()) b_dec[j].emplace_back(it->second, term.coeff);
    }
  }

  // Strategy.
  out.choice = choose_regime(n, options.eps, options.mapping, kind);
  Strategy label = options.strategy == Strategy::automatic ? out.choice.strategy : options.strategy;
  Strategy strategy = label == Strategy::brute_force ? Strategy::nm : label;
  std::vector<int> gamma_of(layout.family.size(), 0);
  bool majorana_family = true;
  for (std::size_t k = 0; k < layout.family.size(); ++k) {
    for (unsigned g = 1; g <= 2 * n; ++g) {
      if (basis.gamma(g).unsigned_part() == layout.family[k]) gamma_of[k] = static_cast<int>(g);
    }
    majorana_family = majorana_family && gamma_of[k] != 0;
  }
  if (strategy == Strategy::chained) {
    const bool feasible = kind == CorrelationKind::anticommutator && majorana_family &&
                          options.mapping == MappingKind::JW;
    if (!feasible && options.strategy == Strategy::chained) {
      throw ConfigError(
          "chained sign recovery needs an anticommutator request with Majorana targets under jw");
    }
    if (!feasible) {
      label = strategy = Strategy::bell_mmc;
      out.warnings.push_back("targets are not single Majoranas; using bell_mmc instead of chained");
    }
  }
  if (uses_bell(strategy) && 2 * n > kMaxSimQubits) {
    throw CapacityError("two-copy measurements need 2n <= " + std::to_string(kMaxSimQubits) +
                        " qubits (n = " + std::to_string(n) + ")");
  }
  out.choice.strategy = label;
  layout.strategy = strategy;
  layout.majorana_index = gamma_of;
  if (strategy == Strategy::mmc) {
    std::vector<std::size_t> all(layout.family.size());
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
    layout.groups = color_groups(layout.family, all);
  } else if (strategy == Strategy::nm) {
    for (std::size_t k = 0; k < layout.family.size(); ++k) layout.groups.push_back({k});
  }
  out.colors = strategy == Strategy::mmc ? layout.groups.size() : 0;

  // One independent task per B component.
  std::vector<ComponentData> data(components.size());
  parallel_for(
      components.size(),
      [&](std::size_t j) {
        Rng rng(derive_seed(options.seed, j));
        data[j] = run_component(components[j], rho, evolution, t, layout, rng);
      },
      options.max_workers);

  for (const auto& d : data) {
    out.circuits_total += d.circuits;
    out.shots_total += d.shots;
    out.warnings.insert(out.warnings.end(), d.warnings.begin(), d.warnings.end());
  }
  const CircuitCounts closed = closed_form_circuits(strategy, kind, components.size(), b_ops.size(),
                                                    layout.family.size(), a_ops.size(), out.colors);
  if (uses_bell(strategy)) {
    out.fermionic_circuits =
        components.empty() ? 0
                           : static_cast<std::uint64_t>(std::llround(
                                 static_cast<double>(out.circuits_total) * b_ops.size() /
                                 static_cast<double>(components.size())));
  } else {
    out.fermionic_circuits = closed.fermionic;
    if (closed.physical != out.circuits_total) {
      throw ContractError("circuit accounting mismatch: ran " + std::to_string(out.circuits_total) +
                          ", closed form " + std::to_string(closed.physical));
    }
  }

  // Assembly.
  out.entries.resize(a_ops.size() * b_ops.size());
  const double theta = step(t);
  std::vector<Complex> scaled(layout.family.size());
  for (std::size_t ai = 0; ai < a_ops.size(); ++ai) {
    for (std::size_t bi = 0; bi < b_ops.size(); ++bi) {
      CorrelationEstimate& e = out.entries[ai * b_ops.size() + bi];
      e.kind = kind;
      e.indices = a_ops[ai].label;
      e.indices.insert(e.indices.end(), b_ops[bi].label.begin(), b_ops[bi].label.end());
      e.t = t;
      e.strategy = label;
      e.regime = out.choice.regime;
      double var_re = 0.0, var_im = 0.0;
      for (const auto& [j, beta] : b_dec[bi]) {
        const ComponentData& d = data[j];
        const ExpectationPlan plan = plan_for(kind, d);
        const Complex z = beta * plan.prefactor;
        for (std::size_t k = 0; k < 3; ++k) {
          const Complex zk = z * plan.weights[k];
          for (std::size_t m = 0; m < scaled.size(); ++m) scaled[m] = zk * a_dec[ai].coeffs[m];
          LinearEstimate lin = d.sets[k].linear(scaled);
          lin.mean += zk * a_dec[ai].identity;
          if (k == 0 && plan.heralded) {
            e.raw += d.c_hat * lin.mean;
            var_re += d.c_hat * d.c_hat * lin.var_re + lin.mean.real() * lin.mean.real() * d.c_var;
            var_im += d.c_hat * d.c_hat * lin.var_im + lin.mean.imag() * lin.mean.imag() * d.c_var;
          } else {
            e.raw += lin.mean;
            var_re += lin.var_re;
            var_im += lin.var_im;
          }
        }
        e.circuits_total += d.circuits;
        e.shots_total += d.shots;
        if (d.branch) e.branches.push_back(*d.branch);
      }
      e.stderr = std::sqrt(var_re + var_im);
      e.value = Complex(0, -1) * theta * e.raw;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Target sets and drivers

std::vector<OperatorTarget> hopping_targets(unsigned n) {
  std::vector<OperatorTarget> out;
  for (unsigned i = 1; i <= n; ++i)
    for (unsigned j = 1; j <= n; ++j) out.push_back({{i, j}, FermionOperator::hopping(n, i, j)});
  return out;
}

std::vector<OperatorTarget> density_targets(unsigned n) {
  std::vector<OperatorTarget> out;
  for (unsigned i = 1; i <= n; ++i) out.push_back({{i}, FermionOperator::number(n, i)});
  return out;
}

std::vector<OperatorTarget> current_targets(unsigned n, double t_hop, bool periodic) {
  std::vector<OperatorTarget> out;
  for (unsigned i = 1; i < n; ++i) out.push_back({{i, i + 1}, FermionOperator::current(n, i, i + 1, t_hop)});
  if (periodic && n >= 3) out.push_back({{n, 1}, FermionOperator::current(n, n, 1, t_hop)});
  if (out.empty()) throw DomainError("current targets need at least two sites");
  return out;
}

std::vector<OperatorTarget> annihilation_targets(unsigned n) {
  std::vector<OperatorTarget> out;
  for (unsigned a = 1; a <= n; ++a) out.push_back({{a}, FermionOperator::annihilation(n, a)});
  return out;
}

std::vector<OperatorTarget> creation_targets(unsigned n) {
  std::vector<OperatorTarget> out;
  for (unsigned b = 1; b <= n; ++b) out.push_back({{b}, FermionOperator::creation(n, b)});
  return out;
}

CorrelationMatrix fast1(const StateVector& rho, const EvolutionCache& evolution, unsigned n,
                        double t, const EngineOptions& options,
                        std::span<const OperatorTarget> targets) {
  if (rho.qubits() != n) throw DimensionError("state width differs from mode count");
  std::vector<OperatorTarget> defaults;
  if (targets.empty()) {
    defaults = hopping_targets(n);
    targets = defaults;
  }
  return estimate_correlations(CorrelationKind::commutator, targets, targets, rho, evolution, t,
                               options);
}

CorrelationMatrix fast2(const StateVector& rho, const EvolutionCache& evolution, unsigned n,
                        double t, const EngineOptions& options) {
  if (rho.qubits() != n) throw DimensionError("state width differs from mode count");
  const auto a = annihilation_targets(n);
  const auto b = creation_targets(n);
  return estimate_correlations(CorrelationKind::anticommutator, a, b, rho, evolution, t, options);
}

CorrelationEstimate general_correlation(const CorrelationEstimate& commutator,
                                        const CorrelationEstimate& anticommutator) {
  if (commutator.kind != CorrelationKind::commutator ||
      anticommutator.kind != CorrelationKind::anticommutator) {
    throw DomainError("general correlation needs one commutator and one anticommutator estimate");
  }
  if (commutator.indices != anticommutator.indices || commutator.t != anticommutator.t) {
    throw DomainError("commutator and anticommutator estimates refer to different (A, B, t)");
  }
  CorrelationEstimate out = anticommutator;
  out.kind = CorrelationKind::general;
  out.raw = 0.5 * (anticommutator.raw + commutator.raw);
  out.value = out.raw;
  out.stderr = 0.5 * std::hypot(commutator.stderr, anticommutator.stderr);
  out.shots_total = commutator.shots_total + anticommutator.shots_total;
  out.circuits_total = commutator.circuits_total + anticommutator.circuits_total;
  return out;
}

CorrelationMatrix general_correlations(const StateVector& rho, const EvolutionCache& evolution,
                                       unsigned n, double t, const EngineOptions& options) {
  if (rho.qubits() != n) throw DimensionError("state width differs from mode count");
  const auto a = annihilation_targets(n);
  const auto b = creation_targets(n);
  EngineOptions comm_opt = options, anti_opt = options;
  comm_opt.seed = derive_seed(options.seed, 1);
  anti_opt.seed = derive_seed(options.seed, 2);
  const auto comm =
      estimate_correlations(CorrelationKind::commutator, a, b, rho, evolution, t, comm_opt);
  const auto anti =
      estimate_correlations(CorrelationKind::anticommutator, a, b, rho, evolution, t, anti_opt);
  CorrelationMatrix out = anti;
  out.kind = CorrelationKind::general;
  out.circuits_total += comm.circuits_total;
  out.fermionic_circuits += comm.fermionic_circuits;
  out.shots_total += comm.shots_total;
  out.warnings.insert(out.warnings.end(), comm.warnings.begin(), comm.warnings.end());
  for (std::size_t k = 0; k < out.entries.size(); ++k) {
    out.entries[k] = general_correlation(comm.entries[k], anti.entries[k]);
  }
  return out;
}

}  // namespace fast
