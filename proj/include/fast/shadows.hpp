#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fast/pauli.hpp"
#include "fast/rng.hpp"
#include "fast/sim.hpp"

namespace fast {

struct ShadowEstimate {
  PauliString observable;
  double mean = 0.0;
  double stderr = 0.0;
  std::size_t shots_used = 0;
};

/// Outcome histogram of one measurement circuit. Row r of `values` holds the
/// single-shot estimator value of every target observable for outcome r.
struct CircuitSamples {
  std::vector<std::size_t> targets;
  std::vector<std::uint64_t> counts;
  std::vector<double> values;  // counts.size() x targets.size(), row-major
  std::uint64_t executed = 0;  // shots run, including discarded (heralded) ones

  std::uint64_t retained() const;
  double value(std::size_t row, std::size_t column) const {
    return values[row * targets.size() + column];
  }
};

/// Mean of sum_k c_k <P_k> with separate variances for its real and
/// imaginary parts.
struct LinearEstimate {
  Complex mean = 0.0;
  double var_re = 0.0;
  double var_im = 0.0;

  double stderr() const;
};

/// Estimates of a list of observables, each either measured by exactly one
/// circuit or fixed to a known value with a known variance.
class SampleSet {
 public:
  SampleSet() = default;
  explicit SampleSet(std::size_t observables) : slots_(observables) {}

  std::size_t size() const { return slots_.size(); }
  const std::vector<CircuitSamples>& circuits() const { return circuits_; }
  std::size_t circuit_count() const { return circuits_.size(); }
  std::uint64_t shots_executed() const;

  void add_circuit(CircuitSamples circuit);
  void set_fixed(std::size_t k, double value, double variance = 0.0);

  /// Sample mean of observable k. A circuit that kept no shots yields 0.
  double mean(std::size_t k) const;
  /// Variance of mean(k); 1 for a circuit that kept no shots.
  double variance(std::size_t k) const;
  std::uint64_t shots(std::size_t k) const;

  LinearEstimate linear(std::span<const Complex> coeffs) const;

 private:
  struct Slot {
    long circuit = -1;
    std::size_t column = 0;
    double fixed = 0.0;
    double fixed_var = 0.0;
    bool assigned = false;
  };
  void claim(std::size_t k);

  std::vector<CircuitSamples> circuits_;
  std::vector<Slot> slots_;
};

/// Groups measured jointly: for every group, `shots[g]` draws from its exact
/// joint distribution. `executed[g]` (if given) records the shots actually run.
SampleSet sample_groups(const StateVector& state, std::span<const PauliString> obs,
                        const std::vector<std::vector<std::size_t>>& groups,
                        std::span<const std::uint64_t> shots, Rng& rng,
                        std::span<const std::uint64_t> executed = {});

/// One random-Pauli circuit shared by all observables. Single-shot value is
/// sign * 3^weight when the sampled bases match the observable, else 0.
SampleSet sample_shadows(const StateVector& state, std::span<const PauliString> obs,
                         std::uint64_t shots, Rng& rng, std::uint64_t executed = 0);

/// One Bell circuit on two copies of `state`; single-shot value is the P(x)P
/// eigenvalue, so means estimate <P>^2.
SampleSet sample_bell(const StateVector& state, std::span<const PauliString> obs,
                      std::uint64_t shots, Rng& rng, std::uint64_t executed = 0);

/// Exact expectations with zero variance (analytic mode).
SampleSet exact_expectations(const StateVector& state, std::span<const PauliString> obs);

std::vector<ShadowEstimate> to_estimates(const SampleSet& set, std::span<const PauliString> obs);

std::vector<ShadowEstimate> estimate_by_shadows(const StateVector& state,
                                                std::span<const PauliString> obs,
                                                std::size_t shots, Rng& rng);

struct GroupEstimate {
  std::vector<ShadowEstimate> estimates;
  std::size_t circuit_count = 0;
  Coloring coloring;
};

/// Colors the commutation graph and measures every color class jointly.
GroupEstimate estimate_by_groups(const StateVector& state, std::span<const PauliString> obs,
                                 std::size_t shots_per_group, Rng& rng);

struct MagnitudeTable {
  std::vector<PauliString> observables;
  std::vector<double> entries;      // estimated |<P>|
  std::vector<double> entry_var;    // delta-method variance of each entry
  double threshold = 0.0;
  std::size_t shots = 0;

  bool survives(std::size_t k) const { return entries[k] > threshold; }
  std::vector<std::size_t> survivors() const;
};

/// Converts Bell means into magnitudes sqrt(max(0, mean)).
MagnitudeTable magnitudes_from_bell(const SampleSet& bell, std::span<const PauliString> obs,
                                    double threshold);

MagnitudeTable bell_magnitudes(const StateVector& state, std::span<const PauliString> obs,
                               std::size_t shots, Rng& rng, double threshold = 0.0);

/// {P_i (x) P_{i+1}} on two copies, first copy on the low qubits.
std::vector<PauliString> chain_observables(std::span<const PauliString> ordered);

struct SignChain {
  int anchor_sign = 1;
  double anchor_estimate = 0.0;
  std::vector<double> pair_products;
  std::vector<int> recovered_signs;
  std::vector<std::string> warnings;
  std::size_t circuits = 0;
  std::uint64_t shots = 0;
};

/// recovered[0] = anchor, recovered[k] = recovered[k-1] * sign(pair[k-1]).
/// Zero is read as +1.
std::vector<int> propagate_signs(int anchor_sign, std::span<const double> pair_products);

/// Runs one chain: the first survivor measured directly, then all adjacent
/// pair products in one two-copy circuit. With `strict`, a pair product below
/// eps^2/8 in magnitude throws UnreliableLinkError; otherwise it is kept and a
/// warning recorded.
SignChain run_chain(const StateVector& state, std::span<const PauliString> ordered,
                    const std::string& name, double eps, std::uint64_t anchor_shots,
                    std::uint64_t chain_shots, Rng& rng, bool strict = true,
                    std::uint64_t anchor_executed = 0, std::uint64_t chain_executed = 0);

struct ChainedSigns {
  SignChain x;
  SignChain y;
};

ChainedSigns chained_signs(const StateVector& state, std::span<const PauliString> survivors_x,
                           std::span<const PauliString> survivors_y, double eps,
                           std::size_t shots, Rng& rng);
ChainedSigns chained_signs(const StateVector& state, std::span<const PauliString> survivors_x,
                           std::span<const PauliString> survivors_y, double eps,
                           std::size_t anchor_shots, std::size_t chain_shots, Rng& rng);

}  // namespace fast
