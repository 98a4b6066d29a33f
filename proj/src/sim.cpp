#include "fast/sim.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include <Eigen/Eigenvalues>

#include "fast/errors.hpp"
#include "fast/parallel.hpp"

namespace fast {
namespace {

constexpr double kNormTolerance = 1e-10;
constexpr double kBranchFloor = 1e-14;

void check_qubits(unsigned qubits) {
  if (qubits == 0) throw DimensionError("state needs at least one qubit");
  if (qubits > kMaxSimQubits) {
    throw CapacityError("dense simulation limited to " + std::to_string(kMaxSimQubits) +
                        " qubits (requested " + std::to_string(qubits) + ")");
  }
}

void check_width(unsigned state_qubits, const PauliString& p) {
  if (p.qubits() != state_qubits) {
    throw DimensionError("operator on " + std::to_string(p.qubits()) + " qubits applied to " +
                         std::to_string(state_qubits) + "-qubit state");
  }
}

constexpr Complex kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

void apply_hadamard(Eigen::VectorXcd& v, unsigned qubit) {
  const std::size_t stride = std::size_t{1} << qubit;
  const double s = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 0; i < static_cast<std::size_t>(v.size()); ++i) {
    if (i & stride) continue;
    const auto a = static_cast<Eigen::Index>(i);
    const auto b = static_cast<Eigen::Index>(i | stride);
    const Complex x = v[a], y = v[b];
    v[a] = s * (x + y);
    v[b] = s * (x - y);
  }
}

void apply_sdg(Eigen::VectorXcd& v, unsigned qubit) {
  const std::size_t stride = std::size_t{1} << qubit;
  for (std::size_t i = 0; i < static_cast<std::size_t>(v.size()); ++i) {
    if (i & stride) v[static_cast<Eigen::Index>(i)] *= Complex(0, -1);
  }
}

void apply_cnot(Eigen::VectorXcd& v, unsigned control, unsigned target) {
  const std::size_t c = std::size_t{1} << control;
  const std::size_t t = std::size_t{1} << target;
  for (std::size_t i = 0; i < static_cast<std::size_t>(v.size()); ++i) {
    if ((i & c) && !(i & t)) std::swap(v[static_cast<Eigen::Index>(i)],
                                       v[static_cast<Eigen::Index>(i | t)]);
  }
}

std::vector<double> squared_moduli(const Eigen::VectorXcd& v) {
  std::vector<double> out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = std::norm(v[i]);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Rng / parallel helpers

std::uint64_t Rng::binomial(std::uint64_t trials, double p) {
  if (trials == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  return std::binomial_distribution<std::uint64_t>(trials, p)(engine_);
}

std::vector<std::uint64_t> Rng::multinomial(std::uint64_t trials, std::span<const double> probs) {
  std::vector<std::uint64_t> counts(probs.size(), 0);
  double mass = std::accumulate(probs.begin(), probs.end(), 0.0);
  std::uint64_t remaining = trials;
  for (std::size_t i = 0; i < probs.size() && remaining > 0; ++i) {
    if (i + 1 == probs.size()) {
      counts[i] = remaining;
      break;
    }
    const double p = mass > 0.0 ? std::clamp(probs[i] / mass, 0.0, 1.0) : 0.0;
    counts[i] = binomial(remaining, p);
    remaining -= counts[i];
    mass -= probs[i];
  }
  return counts;
}

std::size_t Rng::categorical(std::span<const double> cumulative) {
  const double u = uniform() * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_a, std::uint64_t stream_b) {
  return derive_seed(derive_seed(seed, stream_a), stream_b);
}

std::size_t worker_count() {
  if (const char* env = std::getenv("FAST_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  std::size_t max_workers) {
  std::size_t workers = max_workers == 0 ? worker_count() : std::min(max_workers, worker_count());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(unsigned qubits, std::uint64_t index) : qubits_(qubits) {
  check_qubits(qubits);
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << qubits);
  if (index >= static_cast<std::uint64_t>(dim)) throw DimensionError("basis index out of range");
  amps_ = Eigen::VectorXcd::Zero(dim);
  amps_[static_cast<Eigen::Index>(index)] = 1.0;
}

StateVector::StateVector(unsigned qubits, Eigen::VectorXcd amplitudes)
    : qubits_(qubits), amps_(std::move(amplitudes)) {
  check_qubits(qubits);
  if (amps_.size() != static_cast<Eigen::Index>(std::size_t{1} << qubits)) {
    throw DimensionError("amplitude vector length is not 2^" + std::to_string(qubits));
  }
  if (std::abs(amps_.squaredNorm() - 1.0) > kNormTolerance) {
    throw DomainError("state is not normalised (|psi|^2 = " +
                      std::to_string(amps_.squaredNorm()) + ")");
  }
}

StateVector StateVector::normalized(unsigned qubits, Eigen::VectorXcd amplitudes) {
  const double n = amplitudes.norm();
  if (n < 1e-300) throw DomainError("cannot normalise a zero vector");
  amplitudes /= n;
  return StateVector(qubits, std::move(amplitudes));
}

StateVector StateVector::tensor(const StateVector& other) const {
  const unsigned q = qubits_ + other.qubits_;
  check_qubits(q);
  Eigen::VectorXcd out(static_cast<Eigen::Index>(dim() * other.dim()));
  for (std::size_t hi = 0; hi < other.dim(); ++hi) {
    out.segment(static_cast<Eigen::Index>(hi * dim()), static_cast<Eigen::Index>(dim())) =
        other[hi] * amps_;
  }
  return StateVector(q, std::move(out));
}

std::vector<double> StateVector::probabilities() const { return squared_moduli(amps_); }

// ---------------------------------------------------------------------------
// Pauli action

Eigen::VectorXcd apply_pauli(const Eigen::VectorXcd& amps, const PauliString& p) {
  Eigen::VectorXcd out(amps.size());
  const int base = p.phase() + std::popcount(p.xbits() & p.zbits());
  const std::uint64_t x = p.xbits(), z = p.zbits();
  for (std::size_t b = 0; b < static_cast<std::size_t>(amps.size()); ++b) {
    const int sign = std::popcount(b & z) & 1;
    out[static_cast<Eigen::Index>(b ^ x)] =
        kIPow[(base + 2 * sign) & 3] * amps[static_cast<Eigen::Index>(b)];
  }
  return out;
}

StateVector apply_pauli(const StateVector& state, const PauliString& p) {
  check_width(state.qubits(), p);
  Eigen::VectorXcd out = apply_pauli(state.amplitudes(), p);
  // Pauli strings are unitary up to their unit phase.
  return StateVector(state.qubits(), std::move(out));
}

Complex expectation_value(const Eigen::VectorXcd& amps, const PauliString& p) {
  const int base = p.phase() + std::popcount(p.xbits() & p.zbits());
  const std::uint64_t x = p.xbits(), z = p.zbits();
  Complex acc = 0.0;
  for (std::size_t b = 0; b < static_cast<std::size_t>(amps.size()); ++b) {
    const int sign = std::popcount(b & z) & 1;
    acc += std::conj(amps[static_cast<Eigen::Index>(b ^ x)]) * kIPow[(base + 2 * sign) & 3] *
           amps[static_cast<Eigen::Index>(b)];
  }
  return acc;
}

double expectation(const StateVector& state, const PauliString& p) {
  check_width(state.qubits(), p);
  if (!p.is_hermitian()) throw DomainError("expectation needs a Hermitian observable");
  return expectation_value(state.amplitudes(), p).real();
}

StateVector apply_pauli_rotation(const StateVector& state, const PauliString& b) {
  check_width(state.qubits(), b);
  if (!b.is_hermitian()) throw DomainError("rotation generator " + b.to_string() +
                                           " is not Hermitian");
  Eigen::VectorXcd out =
      (state.amplitudes() + Complex(0, 1) * apply_pauli(state.amplitudes(), b)) /
      std::sqrt(2.0);
  return StateVector(state.qubits(), std::move(out));
}

// ---------------------------------------------------------------------------
// Hamiltonian and evolution

Hamiltonian::Hamiltonian(unsigned qubits, std::vector<Term> terms) : qubits_(qubits) {
  for (auto& t : terms) add(t.coeff, t.string);
}

void Hamiltonian::add(double coeff, const PauliString& string) {
  check_width(qubits_, string);
  if (!string.is_hermitian()) {
    throw DomainError("Hamiltonian term " + string.to_string() + " is not Hermitian");
  }
  if (!std::isfinite(coeff)) throw DomainError("Hamiltonian coefficient is not finite");
  // Normalise the sign into the coefficient.
  const double sign = string.phase() == 2 ? -1.0 : 1.0;
  const PauliString plain = string.unsigned_part();
  for (auto& t : terms_) {
    if (t.string == plain) {
      t.coeff += sign * coeff;
      return;
    }
  }
  terms_.push_back({sign * coeff, plain});
}

Eigen::MatrixXcd Hamiltonian::dense() const {
  check_qubits(qubits_);
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << qubits_);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& t : terms_) {
    const int base = std::popcount(t.string.xbits() & t.string.zbits());
    for (std::size_t col = 0; col < static_cast<std::size_t>(dim); ++col) {
      const int sign = std::popcount(col & t.string.zbits()) & 1;
      m(static_cast<Eigen::Index>(col ^ t.string.xbits()), static_cast<Eigen::Index>(col)) +=
          t.coeff * kIPow[(base + 2 * sign) & 3];
    }
  }
  return m;
}

EvolutionCache::EvolutionCache(const Hamiltonian& h) : qubits_(h.qubits()) {
  const Eigen::MatrixXcd dense = h.dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(dense);
  if (solver.info() != Eigen::Success) throw DomainError("Hamiltonian diagonalisation failed");
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
  const Eigen::MatrixXcd rebuilt =
      eigenvectors_ * eigenvalues_.cast<Complex>().asDiagonal() * eigenvectors_.adjoint();
  const double scale = dense.cwiseAbs().maxCoeff();
  reconstruction_error_ = scale > 0.0 ? (rebuilt - dense).cwiseAbs().maxCoeff() / scale : 0.0;
  if (reconstruction_error_ > 1e-8) {
    throw DomainError("eigendecomposition reconstruction error " +
                      std::to_string(reconstruction_error_));
  }
}

Eigen::VectorXcd EvolutionCache::evolve(const Eigen::VectorXcd& amps, double t) const {
  if (t == 0.0) return amps;
  Eigen::VectorXcd coeffs = eigenvectors_.adjoint() * amps;
  for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
    coeffs[k] *= std::exp(Complex(0, -eigenvalues_[k] * t));
  }
  return eigenvectors_ * coeffs;
}

StateVector EvolutionCache::evolve(const StateVector& state, double t) const {
  if (state.qubits() != qubits_) throw DimensionError("state and Hamiltonian widths differ");
  return StateVector::normalized(qubits_, evolve(state.amplitudes(), t));
}

StateVector evolve(const StateVector& state, const Hamiltonian& h, double t) {
  return EvolutionCache(h).evolve(state, t);
}

// ---------------------------------------------------------------------------
// Ancilla-heralded branches

BranchWeights branch_weights(const StateVector& state, const PauliString& b) {
  check_width(state.qubits(), b);
  if (!b.is_hermitian()) throw DomainError("B must be Hermitian");
  const double eb = expectation(state, b);
  // ||(I +/- B)/2 psi||^2 = (1 +/- <B>)/2 for an involutory Hermitian B.
  return {0.5 * (1.0 + eb), 0.5 * (1.0 - eb)};
}

StateVector branch_state(const StateVector& state, const PauliString& b, int bit,
                         const EvolutionCache& evolution, double t) {
  check_width(state.qubits(), b);
  const double sign = bit == 0 ? 1.0 : -1.0;
  Eigen::VectorXcd projected = 0.5 * (state.amplitudes() + sign * apply_pauli(state.amplitudes(), b));
  const double weight = projected.squaredNorm();
  if (weight < kBranchFloor) {
    throw DegenerateBranchError("ancilla branch " + std::to_string(bit) + " has weight " +
                                std::to_string(weight));
  }
  projected /= std::sqrt(weight);
  return StateVector::normalized(state.qubits(), evolution.evolve(projected, t));
}

AncillaOutcome prepare_rho_pm(const StateVector& state, const PauliString& b,
                              const EvolutionCache& evolution, double t, Rng& rng) {
  if (!b.is_hermitian()) throw DomainError("B must be Hermitian");
  const BranchWeights w = branch_weights(state, b);
  AncillaOutcome out;
  out.bit = rng.bernoulli(w.plus) ? 0 : 1;
  out.probability = out.bit == 0 ? w.plus : w.minus;
  out.post_state = branch_state(state, b, out.bit, evolution, t);
  return out;
}

AncillaOutcome prepare_rho_pm(const StateVector& state, const PauliString& b,
                              const Hamiltonian& h, double t, Rng& rng) {
  return prepare_rho_pm(state, b, EvolutionCache(h), t, rng);
}

// ---------------------------------------------------------------------------
// Commuting-set measurement

double MeasurementRecord::mean(std::size_t k) const {
  if (outcomes.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t s = 0; s < outcomes.size(); ++s) acc += value(s, k);
  return acc / static_cast<double>(outcomes.size());
}

void check_commuting_set(std::span<const PauliString> obs, unsigned qubits) {
  if (obs.size() > 64) throw CapacityError("at most 64 observables per joint measurement");
  for (std::size_t i = 0; i < obs.size(); ++i) {
    check_width(qubits, obs[i]);
    if (!obs[i].is_hermitian()) {
      throw ContractError("observable " + obs[i].to_string() + " is not Hermitian");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (!commutes(obs[i], obs[j])) {
        throw ContractError("observables " + std::to_string(j) + " (" + obs[j].to_string() +
                            ") and " + std::to_string(i) + " (" + obs[i].to_string() +
                            ") anticommute");
      }
    }
  }
}

std::vector<JointOutcome> commuting_set_distribution(const StateVector& state,
                                                     std::span<const PauliString> obs) {
  check_commuting_set(obs, state.qubits());
  std::vector<JointOutcome> leaves;
  // Sequential projective measurement; each node carries an unnormalised
  // branch vector whose squared norm is the branch probability.
  struct Node {
    Eigen::VectorXcd amps;
    std::uint64_t pattern;
  };
  std::vector<Node> frontier{{state.amplitudes(), 0}};
  for (std::size_t k = 0; k < obs.size(); ++k) {
    std::vector<Node> next;
    next.reserve(frontier.size() * 2);
    for (auto& node : frontier) {
      const double weight = node.amps.squaredNorm();
      const double ev = expectation_value(node.amps, obs[k]).real();
      const double p_plus = 0.5 * (weight + ev);
      const double p_minus = 0.5 * (weight - ev);
      if (p_minus <= kBranchFloor) {
        next.push_back(std::move(node));
        continue;
      }
      if (p_plus <= kBranchFloor) {
        node.pattern |= std::uint64_t{1} << k;
        next.push_back(std::move(node));
        continue;
      }
      const Eigen::VectorXcd flipped = apply_pauli(node.amps, obs[k]);
      next.push_back({0.5 * (node.amps + flipped), node.pattern});
      next.push_back({0.5 * (node.amps - flipped), node.pattern | (std::uint64_t{1} << k)});
    }
    frontier = std::move(next);
  }
  double total = 0.0;
  leaves.reserve(frontier.size());
  for (const auto& node : frontier) {
    const double p = node.amps.squaredNorm();
    leaves.push_back({node.pattern, p});
    total += p;
  }
  for (auto& leaf : leaves) leaf.probability /= total;
  return leaves;
}

MeasurementRecord measure_commuting_set(const StateVector& state,
                                        std::span<const PauliString> obs, std::size_t shots,
                                        Rng& rng) {
  const auto dist = commuting_set_distribution(state, obs);
  std::vector<double> cumulative(dist.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) cumulative[i] = (acc += dist[i].probability);
  MeasurementRecord record{{obs.begin(), obs.end()}, {}};
  record.outcomes.reserve(shots);
  for (std::size_t s = 0; s < shots; ++s) {
    record.outcomes.push_back(dist[rng.categorical(cumulative)].pattern);
  }
  return record;
}

// ---------------------------------------------------------------------------
// Random Pauli and Bell measurements

char PauliShot::basis(unsigned qubit) const {
  const bool xb = (basis_x >> qubit) & 1u;
  const bool zb = (basis_z >> qubit) & 1u;
  return xb ? (zb ? 'Y' : 'X') : 'Z';
}

std::vector<double> pauli_basis_distribution(const StateVector& state, std::uint64_t basis_x,
                                             std::uint64_t basis_z) {
  Eigen::VectorXcd v = state.amplitudes();
  for (unsigned k = 0; k < state.qubits(); ++k) {
    const bool xb = (basis_x >> k) & 1u;
    const bool zb = (basis_z >> k) & 1u;
    if (xb && zb) {
      apply_sdg(v, k);
      apply_hadamard(v, k);
    } else if (xb) {
      apply_hadamard(v, k);
    }
  }
  return squared_moduli(v);
}

PauliShot random_pauli_shot(const StateVector& state, Rng& rng) {
  PauliShot shot;
  for (unsigned k = 0; k < state.qubits(); ++k) {
    switch (rng.below(3)) {
      case 0: shot.basis_x |= std::uint64_t{1} << k; break;
      case 1:
        shot.basis_x |= std::uint64_t{1} << k;
        shot.basis_z |= std::uint64_t{1} << k;
        break;
      default: shot.basis_z |= std::uint64_t{1} << k; break;
    }
  }
  const auto probs = pauli_basis_distribution(state, shot.basis_x, shot.basis_z);
  std::vector<double> cumulative(probs.size());
  std::partial_sum(probs.begin(), probs.end(), cumulative.begin());
  shot.bits = rng.categorical(cumulative);
  return shot;
}

std::vector<double> bell_distribution(const StateVector& state) {
  const unsigned n = state.qubits();
  Eigen::VectorXcd v = state.tensor(state).amplitudes();
  for (unsigned k = 0; k < n; ++k) {
    apply_cnot(v, k, n + k);
    apply_hadamard(v, k);
  }
  return squared_moduli(v);
}

int bell_value(const PauliString& p, std::uint64_t a, std::uint64_t b) {
  const int parity = std::popcount(p.xbits() & a) + std::popcount(p.zbits() & b) +
                     std::popcount(p.xbits() & p.zbits());
  return (parity & 1) ? -1 : 1;
}

}  // namespace fast
