#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace fast {

using Complex = std::complex<double>;

/// Maximum number of qubits a PauliString can address.
inline constexpr unsigned kMaxQubits = 64;

/**
 * Tensor product of single-qubit Paulis with an exact phase in {+1, +i, -1, -i}.
 *
 * Qubit k (0-based) is encoded by bit k of the x and z masks:
 * (0,0)=I, (1,0)=X, (1,1)=Y, (0,1)=Z. The letters are the usual Hermitian
 * matrices, so Y carries no hidden phase; the string equals
 * i^phase * L_1 (x) L_2 (x) ... (x) L_q.
 *
 * Text form is "[+|-][i]L_1L_2...L_q", e.g. "+XZ", "-iYI". Leftmost letter
 * is qubit 1.
 */
class PauliString {
 public:
  PauliString() = default;

  /// Identity on `qubits` qubits.
  explicit PauliString(unsigned qubits);
  PauliString(unsigned qubits, std::uint64_t xbits, std::uint64_t zbits,
              std::uint8_t phase = 0);

  static PauliString parse(std::string_view text);
  /// Single-letter string: letter in {I,X,Y,Z} on 0-based `qubit`.
  static PauliString single(unsigned qubits, unsigned qubit, char letter);

  unsigned qubits() const { return qubits_; }
  std::uint64_t xbits() const { return x_; }
  std::uint64_t zbits() const { return z_; }
  /// Exponent k of the phase i^k, k in 0..3.
  std::uint8_t phase() const { return phase_; }
  Complex phase_value() const;
  std::uint64_t support() const { return x_ | z_; }

  bool is_identity() const { return x_ == 0 && z_ == 0 && phase_ == 0; }
  bool is_hermitian() const { return (phase_ & 1u) == 0; }
  unsigned weight() const;
  char letter(unsigned qubit) const;

  /// Same letters, phase +1.
  PauliString unsigned_part() const { return PauliString(qubits_, x_, z_, 0); }
  PauliString with_phase(std::uint8_t phase) const {
    return PauliString(qubits_, x_, z_, phase);
  }
  PauliString negated() const { return with_phase(static_cast<std::uint8_t>(phase_ + 2)); }
  PauliString adjoint() const;

  /// Kronecker product: `this` on the low qubits, `other` on the high ones.
  PauliString tensor(const PauliString& other) const;

  std::string to_string() const;

  friend bool operator==(const PauliString&, const PauliString&) = default;
  /// Orders by (qubits, x, z, phase); used for deterministic containers.
  friend bool operator<(const PauliString& a, const PauliString& b);

 private:
  unsigned qubits_ = 0;
  std::uint64_t x_ = 0;
  std::uint64_t z_ = 0;
  std::uint8_t phase_ = 0;
};

PauliString multiply(const PauliString& a, const PauliString& b);
inline PauliString operator*(const PauliString& a, const PauliString& b) {
  return multiply(a, b);
}

/// True iff ab = ba (symplectic inner product is even).
bool commutes(const PauliString& a, const PauliString& b);

/// Dense 2^q x 2^q matrix. Basis index bit k is the value of qubit k.
Eigen::MatrixXcd to_dense(const PauliString& p);

struct PauliStringHash {
  std::size_t operator()(const PauliString& p) const noexcept;
};

/// Graph on observables; edges join ANTIcommuting pairs so that color classes
/// are simultaneously measurable groups.
class CommutationGraph {
 public:
  CommutationGraph() = default;
  explicit CommutationGraph(std::size_t nodes);

  std::size_t size() const { return adjacency_.size(); }
  bool adjacent(std::size_t i, std::size_t j) const;
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return adjacency_[i]; }
  std::size_t degree(std::size_t i) const { return adjacency_[i].size(); }
  std::size_t max_degree() const;
  std::size_t edge_count() const;

  /// Adds the undirected edge {i, j}; self loops and duplicates are rejected.
  void add_edge(std::size_t i, std::size_t j);

 private:
  std::vector<std::vector<std::size_t>> adjacency_;  // sorted neighbor lists
};

struct Coloring {
  std::vector<std::size_t> color_of;
  std::size_t num_colors = 0;

  /// Node indices grouped by color, each class in ascending order.
  std::vector<std::vector<std::size_t>> classes() const;
};

CommutationGraph build_commutation_graph(std::span<const PauliString> obs);

/// First-fit coloring in ascending node order.
Coloring greedy_color(const CommutationGraph& g);

/// True iff no edge joins two nodes of the same color.
bool is_proper(const CommutationGraph& g, const Coloring& c);

}  // namespace fast
