#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fast/pauli.hpp"

namespace fast {

enum class MappingKind { JW, BK, TT };

std::string to_string(MappingKind kind);
/// Accepts "jw", "bk", "tt" (case-insensitive).
MappingKind parse_mapping(std::string_view text);

/// Images of the 2n Majorana operators under a fermion-to-qubit mapping.
///
/// Majorana indices are 1-based: gamma(2j-1) and gamma(2j) belong to mode j,
/// with c_j = (gamma(2j-1) + i gamma(2j)) / 2. Every mapping places the
/// fermionic vacuum on a qubit state in which the number operators
/// n_j = (1 + i gamma(2j-1) gamma(2j)) / 2 vanish; for JW and BK that is |0...0>.
struct MajoranaBasis {
  MappingKind mapping = MappingKind::JW;
  unsigned modes = 0;
  std::vector<PauliString> gammas;  // gammas[a-1] is gamma(a)

  unsigned qubits() const { return modes; }
  const PauliString& gamma(unsigned index) const;
};

MajoranaBasis majorana_basis(unsigned modes, MappingKind kind);

/// Upper bound on Majorana weight guaranteed by the balanced ternary tree.
unsigned ternary_tree_weight_bound(unsigned modes);

/// Linear combination of Majorana monomials over `modes` modes.
///
/// Each term keeps its indices strictly increasing; products are brought to
/// that canonical order with the anticommutation sign and gamma^2 = 1.
class FermionOperator {
 public:
  struct Term {
    Complex coeff;
    std::vector<unsigned> majoranas;  // strictly increasing, 1..2n
  };

  FermionOperator() = default;
  explicit FermionOperator(unsigned modes) : modes_(modes) {}

  static FermionOperator identity(unsigned modes, Complex coeff = 1.0);
  static FermionOperator majorana(unsigned modes, unsigned index);
  static FermionOperator annihilation(unsigned modes, unsigned mode);
  static FermionOperator creation(unsigned modes, unsigned mode);
  static FermionOperator number(unsigned modes, unsigned mode);
  /// c_i^dagger c_j.
  static FermionOperator hopping(unsigned modes, unsigned i, unsigned j);
  /// Current J_ij = i t (c_i^dagger c_j - c_j^dagger c_i).
  static FermionOperator current(unsigned modes, unsigned i, unsigned j, double t_hop = 1.0);

  unsigned modes() const { return modes_; }
  const std::vector<Term>& terms() const { return terms_; }

  /// Adds coeff * gamma(i_1) gamma(i_2) ... for an arbitrary index order.
  void add_term(Complex coeff, std::vector<unsigned> majoranas);

  FermionOperator adjoint() const;
  FermionOperator operator+(const FermionOperator& other) const;
  FermionOperator operator-(const FermionOperator& other) const;
  FermionOperator operator*(const FermionOperator& other) const;
  FermionOperator operator*(Complex scalar) const;
  FermionOperator& operator+=(const FermionOperator& other);

 private:
  void check_compatible(const FermionOperator& other) const;
  void merge(Complex coeff, std::vector<unsigned> canonical);

  unsigned modes_ = 0;
  std::vector<Term> terms_;
};

struct PauliTerm {
  Complex coeff;
  PauliString string;  // phase +1
};

/// Pauli decomposition of `op`: duplicates merged, vanishing terms dropped,
/// strings carry phase +1 with the phase folded into the coefficient.
std::vector<PauliTerm> encode(const FermionOperator& op, const MajoranaBasis& basis);

/// Dense matrix of an encoded operator.
Eigen::MatrixXcd to_dense(std::span<const PauliTerm> terms, unsigned qubits);

/// The Hermitian strings i gamma_a gamma_b for a < b, in lexicographic (a, b)
/// order: n(2n-1) strings.
std::vector<PauliString> one_body_observables(unsigned modes, const MajoranaBasis& basis);

}  // namespace fast
