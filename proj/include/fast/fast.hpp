#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fast/mapping.hpp"
#include "fast/pauli.hpp"
#include "fast/shadows.hpp"
#include "fast/sim.hpp"

namespace fast {

enum class CorrelationKind { commutator, anticommutator, general };
enum class Regime { small_n, large_n };
enum class Strategy { automatic, mmc, dc, nm, bell_mmc, chained, brute_force };
enum class Branch { plus, minus };
enum class EstimationMode { sampled, analytic };

std::string to_string(CorrelationKind kind);
std::string to_string(Regime regime);
std::string to_string(Strategy strategy);
std::string to_string(Branch branch);
CorrelationKind parse_kind(std::string_view text);
Strategy parse_strategy(std::string_view text);
EstimationMode parse_mode(std::string_view text);

struct CorrelationRequest {
  CorrelationKind kind = CorrelationKind::commutator;
  FermionOperator a;
  FermionOperator b;
  double t = 0.0;
  double eps = 0.1;
  double delta = 0.05;

  void validate() const;
};

struct RegimeChoice {
  Regime regime = Regime::small_n;
  Strategy strategy = Strategy::mmc;
};

/// small_n iff n <= 1/eps^2 (ties to small_n); strategy from the
/// (regime, mapping, kind) cell of the protocol table.
RegimeChoice choose_regime(unsigned n, double eps, MappingKind mapping, CorrelationKind kind);

struct BranchSelection {
  std::uint64_t n_plus = 0;
  std::uint64_t n_minus = 0;
  Branch chosen = Branch::plus;
  double c_plus_sq_hat = 1.0;
  double c_minus_sq_hat = 0.0;

  std::uint64_t retained() const { return chosen == Branch::plus ? n_plus : n_minus; }
  double chosen_weight() const { return chosen == Branch::plus ? c_plus_sq_hat : c_minus_sq_hat; }
};

/// Ancilla bit 0 heralds the plus branch. Tie goes to plus.
BranchSelection majority_select(std::span<const int> ancilla_bits);
BranchSelection majority_select(std::uint64_t n_plus, std::uint64_t n_minus);

enum class PlanState { rho1, rho2, rho3 };

/// Three-term expectation plan:
///   value = prefactor * (w1 * [c^2] * <A>_1 + w2 * <A>_2 + w3 * <A>_3)
/// where the bracketed branch weight appears only for heralded plans.
/// rho2 = U rho U^dag, rho3 = U B rho B U^dag with U = e^{-iHt};
/// rho1 = U e^{i pi/4 B} rho e^{-i pi/4 B} U^dag for commutators and the
/// normalised ancilla-heralded branch state for anticommutators.
struct ExpectationPlan {
  CorrelationKind kind = CorrelationKind::commutator;
  Branch branch = Branch::plus;
  PauliString a;
  PauliString b;
  double t = 0.0;
  Complex prefactor = 1.0;
  std::array<double, 3> weights{};
  bool heralded = false;

  Complex combine(Complex e1, Complex e2, Complex e3, double c_sq = 1.0) const;
};

ExpectationPlan reformulate_commutator(const PauliString& a, const PauliString& b, double t);
ExpectationPlan reformulate_anticommutator(const PauliString& a, const PauliString& b, double t,
                                           Branch branch);

/// State on which the plan measures A for the given term.
StateVector plan_state(const ExpectationPlan& plan, PlanState which, const StateVector& rho,
                       const EvolutionCache& evolution);

/// Plan evaluated with exact expectations and the exact branch weight.
Complex evaluate_exact(const ExpectationPlan& plan, const StateVector& rho,
                       const EvolutionCache& evolution);

/// Shots per circuit for each circuit type. Every count must be >= kMinShots.
struct ShotTable {
  std::uint64_t per_circuit = 4000;
  std::uint64_t shadow = 40000;
  std::uint64_t bell = 40000;
  std::uint64_t anchor = 4000;
  std::uint64_t chain = 20000;

  void validate() const;
};

inline constexpr std::uint64_t kMinShots = 10;

struct EngineOptions {
  MappingKind mapping = MappingKind::JW;
  double eps = 0.1;
  double delta = 0.05;
  EstimationMode mode = EstimationMode::sampled;
  Strategy strategy = Strategy::automatic;
  ShotTable shots;
  std::uint64_t seed = 0;
  std::size_t max_workers = 0;

  void validate() const;
};

/// A fermionic operator with the indices it is reported under.
struct OperatorTarget {
  std::vector<unsigned> label;
  FermionOperator op;
};

struct CorrelationEstimate {
  CorrelationKind kind = CorrelationKind::commutator;
  std::vector<unsigned> indices;
  double t = 0.0;
  Complex raw = 0.0;    // tr(rho [A(t),B]) or tr(rho {A(t),B}) or tr(rho A(t) B)
  Complex value = 0.0;  // -i theta(t) raw for commutators and anticommutators
  double stderr = 0.0;
  std::uint64_t shots_total = 0;
  std::uint64_t circuits_total = 0;
  Strategy strategy = Strategy::mmc;
  Regime regime = Regime::small_n;
  std::vector<BranchSelection> branches;
};

struct CorrelationMatrix {
  CorrelationKind kind = CorrelationKind::commutator;
  double t = 0.0;
  RegimeChoice choice;
  std::vector<CorrelationEstimate> entries;  // a-major order
  std::size_t a_count = 0;
  std::size_t b_count = 0;
  std::size_t family_size = 0;      // distinct non-identity A components
  std::size_t b_components = 0;     // distinct B components given circuits
  std::size_t colors = 0;           // groups for MMC on the full family
  std::uint64_t circuits_total = 0;
  std::uint64_t fermionic_circuits = 0;
  std::uint64_t shots_total = 0;
  std::vector<std::string> warnings;

  const CorrelationEstimate& at(std::size_t ai, std::size_t bi) const {
    return entries[ai * b_count + bi];
  }
};

/// Step function with theta(0) = 1.
inline double step(double t) { return t >= 0.0 ? 1.0 : 0.0; }

/// Commutator or anticommutator correlations for every (A, B) pair, sharing
/// the measurement data of each B component across all A targets.
CorrelationMatrix estimate_correlations(CorrelationKind kind, std::span<const OperatorTarget> a_ops,
                                        std::span<const OperatorTarget> b_ops,
                                        const StateVector& rho, const EvolutionCache& evolution,
                                        double t, const EngineOptions& options);

/// c_i^dag c_j for all (i, j), labelled (i, j).
std::vector<OperatorTarget> hopping_targets(unsigned n);
/// n_i, labelled (i).
std::vector<OperatorTarget> density_targets(unsigned n);
/// J_{i,i+1} for consecutive sites (plus (n,1) when periodic), labelled (i, j).
std::vector<OperatorTarget> current_targets(unsigned n, double t_hop, bool periodic);
/// c_a, labelled (a).
std::vector<OperatorTarget> annihilation_targets(unsigned n);
/// c_b^dag, labelled (b).
std::vector<OperatorTarget> creation_targets(unsigned n);

/// FAST 1: commutator correlations between the given targets (default: all
/// hopping operators, indices (i,j,k,l)).
CorrelationMatrix fast1(const StateVector& rho, const EvolutionCache& evolution, unsigned n,
                        double t, const EngineOptions& options,
                        std::span<const OperatorTarget> targets = {});

/// FAST 2: retarded Green's function G^R_ab(t) = -i theta(t) tr(rho {c_a(t), c_b^dag}).
CorrelationMatrix fast2(const StateVector& rho, const EvolutionCache& evolution, unsigned n,
                        double t, const EngineOptions& options);

/// tr(rho A(t) B) = (anticommutator + commutator) / 2.
CorrelationEstimate general_correlation(const CorrelationEstimate& commutator,
                                        const CorrelationEstimate& anticommutator);

/// tr(rho c_a(t) c_b^dag) for all (a, b).
CorrelationMatrix general_correlations(const StateVector& rho, const EvolutionCache& evolution,
                                       unsigned n, double t, const EngineOptions& options);

/// Closed-form circuit counts of the fixed-layout strategies.
struct CircuitCounts {
  std::uint64_t physical = 0;
  std::uint64_t fermionic = 0;
};
CircuitCounts closed_form_circuits(Strategy strategy, CorrelationKind kind, std::size_t b_components,
                                   std::size_t b_fermionic, std::size_t family_size,
                                   std::size_t a_fermionic, std::size_t colors);

}  // namespace fast
