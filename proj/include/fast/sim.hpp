#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fast/pauli.hpp"
#include "fast/rng.hpp"

namespace fast {

/// Largest register simulated densely (two copies of a 7-mode system).
inline constexpr unsigned kMaxSimQubits = 14;

/// Pure state on q qubits. Basis index bit k holds the value of qubit k.
class StateVector {
 public:
  StateVector() = default;
  /// Computational basis state |index>.
  StateVector(unsigned qubits, std::uint64_t index = 0);
  /// Takes ownership of normalised amplitudes (checked to 1e-10).
  StateVector(unsigned qubits, Eigen::VectorXcd amplitudes);

  /// Normalises `amplitudes`; throws DomainError for a zero vector.
  static StateVector normalized(unsigned qubits, Eigen::VectorXcd amplitudes);

  unsigned qubits() const { return qubits_; }
  std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
  const Eigen::VectorXcd& amplitudes() const { return amps_; }
  Complex operator[](std::size_t i) const { return amps_[static_cast<Eigen::Index>(i)]; }

  double norm() const { return amps_.norm(); }
  /// |this> (x) |other>, `this` on the low qubits.
  StateVector tensor(const StateVector& other) const;
  /// Squared modulus of every amplitude.
  std::vector<double> probabilities() const;

 private:
  unsigned qubits_ = 0;
  Eigen::VectorXcd amps_;
};

/// P|psi> without renormalisation (P may carry any phase).
Eigen::VectorXcd apply_pauli(const Eigen::VectorXcd& amps, const PauliString& p);
StateVector apply_pauli(const StateVector& state, const PauliString& p);

/// <psi|P|psi> for Hermitian P.
double expectation(const StateVector& state, const PauliString& p);
Complex expectation_value(const Eigen::VectorXcd& amps, const PauliString& p);

/// exp(i pi/4 B)|psi> = (I + iB)/sqrt(2) |psi>.
StateVector apply_pauli_rotation(const StateVector& state, const PauliString& b);

/// Real combination of Hermitian Pauli strings.
class Hamiltonian {
 public:
  struct Term {
    double coeff;
    PauliString string;
  };

  explicit Hamiltonian(unsigned qubits) : qubits_(qubits) {}
  Hamiltonian(unsigned qubits, std::vector<Term> terms);

  unsigned qubits() const { return qubits_; }
  const std::vector<Term>& terms() const { return terms_; }
  void add(double coeff, const PauliString& string);

  Eigen::MatrixXcd dense() const;

 private:
  unsigned qubits_;
  std::vector<Term> terms_;
};

/// Eigendecomposition H = V diag(lambda) V^dagger, computed once per
/// Hamiltonian and shared read-only.
class EvolutionCache {
 public:
  explicit EvolutionCache(const Hamiltonian& h);

  unsigned qubits() const { return qubits_; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXcd& eigenvectors() const { return eigenvectors_; }
  /// max |(V diag V^dagger - H)_{ij}|, relative to max |H_{ij}| (0 for H = 0).
  double reconstruction_error() const { return reconstruction_error_; }

  /// e^{-iHt}|psi>.
  StateVector evolve(const StateVector& state, double t) const;
  Eigen::VectorXcd evolve(const Eigen::VectorXcd& amps, double t) const;

 private:
  unsigned qubits_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXcd eigenvectors_;
  double reconstruction_error_ = 0.0;
};

StateVector evolve(const StateVector& state, const Hamiltonian& h, double t);

/// Outcome of one run of the ancilla-controlled-B circuit.
struct AncillaOutcome {
  int bit = 0;  // 0 heralds the plus branch, 1 the minus branch
  StateVector post_state;
  double probability = 0.0;
};

/// Analytic branch weights C+^2 = ||(I+B)/2 psi||^2 and C-^2.
struct BranchWeights {
  double plus = 0.0;
  double minus = 0.0;
};
BranchWeights branch_weights(const StateVector& state, const PauliString& b);

/// e^{-iHt} (I +/- B)/2 |psi>, normalised. Throws DegenerateBranchError when
/// the branch weight is below 1e-14.
StateVector branch_state(const StateVector& state, const PauliString& b, int bit,
                         const EvolutionCache& evolution, double t);

/// Samples the ancilla bit with P(0) = C+^2 and returns the heralded state.
AncillaOutcome prepare_rho_pm(const StateVector& state, const PauliString& b,
                              const EvolutionCache& evolution, double t, Rng& rng);
AncillaOutcome prepare_rho_pm(const StateVector& state, const PauliString& b,
                              const Hamiltonian& h, double t, Rng& rng);

/// Shot-indexed joint outcomes of a commuting measurement. Bit k of
/// outcomes[s] is set when observable k returned -1 on shot s.
struct MeasurementRecord {
  std::vector<PauliString> observables;
  std::vector<std::uint64_t> outcomes;

  std::size_t shots() const { return outcomes.size(); }
  int value(std::size_t shot, std::size_t k) const {
    return ((outcomes[shot] >> k) & 1u) ? -1 : 1;
  }
  double mean(std::size_t k) const;
};

/// Exact joint distribution of a commuting set: (outcome pattern, probability)
/// pairs with nonzero weight, in sequential-measurement tree order.
struct JointOutcome {
  std::uint64_t pattern;
  double probability;
};
std::vector<JointOutcome> commuting_set_distribution(const StateVector& state,
                                                     std::span<const PauliString> obs);

/// Throws ContractError naming the first anticommuting pair, or on
/// non-Hermitian / width-mismatched input.
void check_commuting_set(std::span<const PauliString> obs, unsigned qubits);

MeasurementRecord measure_commuting_set(const StateVector& state,
                                        std::span<const PauliString> obs, std::size_t shots,
                                        Rng& rng);

/// Per-qubit basis of a random Pauli measurement encoded as masks: X -> x bit,
/// Z -> z bit, Y -> both.
struct PauliShot {
  std::uint64_t basis_x = 0;
  std::uint64_t basis_z = 0;
  std::uint64_t bits = 0;  // bit k set: qubit k read 1 (eigenvalue -1)

  char basis(unsigned qubit) const;
};

/// Probabilities of the 2^q readouts after rotating every qubit into the
/// basis given by (basis_x, basis_z).
std::vector<double> pauli_basis_distribution(const StateVector& state, std::uint64_t basis_x,
                                             std::uint64_t basis_z);

PauliShot random_pauli_shot(const StateVector& state, Rng& rng);

/// Probabilities of Bell-basis readouts on |psi> (x) |psi>. Index a | (b << n):
/// bit k of a is the X(x)X outcome and bit k of b the Z(x)Z outcome on qubit
/// pair (k, n+k); eigenvalue (-1)^bit.
std::vector<double> bell_distribution(const StateVector& state);

/// Eigenvalue of P(x)P on a Bell readout (a, b) for Hermitian P.
int bell_value(const PauliString& p, std::uint64_t a, std::uint64_t b);

}  // namespace fast
