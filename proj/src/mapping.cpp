#include "fast/mapping.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "fast/errors.hpp"

namespace fast {
namespace {

constexpr double kDropTolerance = 1e-14;

std::uint64_t bit(unsigned qubit0) { return std::uint64_t{1} << qubit0; }

// Fenwick (binary indexed tree) sets, 1-based positions.
std::vector<unsigned> update_set(unsigned j, unsigned n) {
  std::vector<unsigned> out;
  for (unsigned k = j; k <= n; k += k & (~k + 1)) out.push_back(k);
  return out;
}

std::vector<unsigned> parity_set(unsigned j) {
  std::vector<unsigned> out;
  for (unsigned k = j - 1; k > 0; k -= k & (~k + 1)) out.push_back(k);
  return out;
}

std::vector<unsigned> flip_set(unsigned j) {
  std::vector<unsigned> out;
  const unsigned floor = j - (j & (~j + 1));
  for (unsigned k = j - 1; k > floor; k -= k & (~k + 1)) out.push_back(k);
  return out;
}

std::vector<PauliString> bravyi_kitaev(unsigned n) {
  std::vector<PauliString> gammas;
  gammas.reserve(2 * n);
  for (unsigned j = 1; j <= n; ++j) {
    std::uint64_t update = 0, parity = 0, flip = 0;
    for (unsigned k : update_set(j, n)) update |= bit(k - 1);
    for (unsigned k : parity_set(j)) parity |= bit(k - 1);
    for (unsigned k : flip_set(j)) flip |= bit(k - 1);
    const std::uint64_t self = bit(j - 1);
    // gamma(2j-1) = X_U Z_P ; gamma(2j) = X_{U\j} Y_j Z_{P\F}
    gammas.emplace_back(n, update, parity);
    gammas.emplace_back(n, update, (parity & ~flip) | self);
  }
  return gammas;
}

std::vector<PauliString> jordan_wigner(unsigned n) {
  std::vector<PauliString> gammas;
  gammas.reserve(2 * n);
  for (unsigned j = 0; j < n; ++j) {
    const std::uint64_t tail = bit(j) - 1;
    gammas.emplace_back(n, bit(j), tail);
    gammas.emplace_back(n, bit(j), tail | bit(j));
  }
  return gammas;
}

// Complete ternary tree filled breadth-first: node k has children 3k+1 (X),
// 3k+2 (Y), 3k+3 (Z). Every missing child is a leaf; the string of a leaf is
// the product of edge letters on its root path. The 2n+1 leaves pairwise
// anticommute; the rightmost (all-Z) one is dropped.
void collect_leaves(unsigned n, unsigned node, std::uint64_t x, std::uint64_t z,
                    std::vector<PauliString>& leaves) {
  const std::uint64_t self = bit(node);
  const std::uint64_t xs[3] = {x | self, x | self, x};
  const std::uint64_t zs[3] = {z, z | self, z | self};
  for (unsigned e = 0; e < 3; ++e) {
    const unsigned child = 3 * node + 1 + e;
    if (child < n) {
      collect_leaves(n, child, xs[e], zs[e], leaves);
    } else {
      leaves.emplace_back(n, xs[e], zs[e]);
    }
  }
}

std::vector<PauliString> ternary_tree(unsigned n) {
  std::vector<PauliString> leaves;
  leaves.reserve(2 * n + 1);
  collect_leaves(n, 0, 0, 0, leaves);
  leaves.pop_back();
  return leaves;
}

// Sorts indices with the sign of the permutation and cancels equal
// neighbours (gamma^2 = 1). Returns the sign.
int canonicalize(std::vector<unsigned>& idx) {
  int sign = 1;
  for (std::size_t i = 1; i < idx.size(); ++i) {
    for (std::size_t j = i; j > 0 && idx[j - 1] > idx[j]; --j) {
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
    }
  }
  std::vector<unsigned> out;
  out.reserve(idx.size());
  for (unsigned v : idx) {
    if (!out.empty() && out.back() == v) {
      out.pop_back();
    } else {
      out.push_back(v);
    }
  }
  idx = std::move(out);
  return sign;
}

}  // namespace

std::string to_string(MappingKind kind) {
  switch (kind) {
    case MappingKind::JW: return "jw";
    case MappingKind::BK: return "bk";
    case MappingKind::TT: return "tt";
  }
  return "?";
}

MappingKind parse_mapping(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "jw") return MappingKind::JW;
  if (lower == "bk") return MappingKind::BK;
  if (lower == "tt") return MappingKind::TT;
  throw DomainError("unknown mapping '" + std::string(text) + "' (expected jw|bk|tt)");
}

const PauliString& MajoranaBasis::gamma(unsigned index) const {
  if (index == 0 || index > gammas.size()) {
    throw DomainError("Majorana index " + std::to_string(index) + " outside 1.." +
                      std::to_string(gammas.size()));
  }
  return gammas[index - 1];
}

unsigned ternary_tree_weight_bound(unsigned modes) {
  // ceil(log3(2n)) + 1, computed in integers.
  unsigned levels = 0;
  for (unsigned long long p = 1; p < 2ULL * modes; p *= 3) ++levels;
  return levels + 1;
}

MajoranaBasis majorana_basis(unsigned modes, MappingKind kind) {
  if (modes == 0) throw DomainError("mode count must be positive");
  if (modes > kMaxQubits) throw CapacityError("at most 64 modes are supported");
  MajoranaBasis basis{kind, modes, {}};
  switch (kind) {
    case MappingKind::JW: basis.gammas = jordan_wigner(modes); break;
    case MappingKind::BK: basis.gammas = bravyi_kitaev(modes); break;
    case MappingKind::TT: {
      basis.gammas = ternary_tree(modes);
      const unsigned bound = ternary_tree_weight_bound(modes);
      for (const auto& g : basis.gammas) {
        if (g.weight() > bound) throw ContractError("ternary tree weight bound violated");
      }
      break;
    }
  }
  return basis;
}

FermionOperator FermionOperator::identity(unsigned modes, Complex coeff) {
  FermionOperator op(modes);
  op.add_term(coeff, {});
  return op;
}

FermionOperator FermionOperator::majorana(unsigned modes, unsigned index) {
  FermionOperator op(modes);
  op.add_term(1.0, {index});
  return op;
}

FermionOperator FermionOperator::annihilation(unsigned modes, unsigned mode) {
  FermionOperator op(modes);
  op.add_term(0.5, {2 * mode - 1});
  op.add_term(Complex(0, 0.5), {2 * mode});
  return op;
}

FermionOperator FermionOperator::creation(unsigned modes, unsigned mode) {
  return annihilation(modes, mode).adjoint();
}

FermionOperator FermionOperator::number(unsigned modes, unsigned mode) {
  return creation(modes, mode) * annihilation(modes, mode);
}

FermionOperator FermionOperator::hopping(unsigned modes, unsigned i, unsigned j) {
  return creation(modes, i) * annihilation(modes, j);
}

FermionOperator FermionOperator::current(unsigned modes, unsigned i, unsigned j, double t_hop) {
  return (hopping(modes, i, j) - hopping(modes, j, i)) * Complex(0, t_hop);
}

void FermionOperator::add_term(Complex coeff, std::vector<unsigned> majoranas) {
  if (modes_ == 0) throw DomainError("fermion operator has no modes");
  for (unsigned a : majoranas) {
    if (a == 0 || a > 2 * modes_) {
      throw DomainError("Majorana index " + std::to_string(a) + " outside 1.." +
                        std::to_string(2 * modes_));
    }
  }
  const int sign = canonicalize(majoranas);
  merge(coeff * static_cast<double>(sign), std::move(majoranas));
}

void FermionOperator::merge(Complex coeff, std::vector<unsigned> canonical) {
  for (auto it = terms_.begin(); it != terms_.end(); ++it) {
    if (it->majoranas == canonical) {
      it->coeff += coeff;
      if (std::abs(it->coeff) < kDropTolerance) terms_.erase(it);
      return;
    }
  }
  if (std::abs(coeff) < kDropTolerance) return;
  terms_.push_back({coeff, std::move(canonical)});
}

void FermionOperator::check_compatible(const FermionOperator& other) const {
  if (modes_ != other.modes_) throw DimensionError("fermion operators on different mode counts");
}

FermionOperator FermionOperator::adjoint() const {
  FermionOperator out(modes_);
  for (const auto& t : terms_) {
    // Reversing k anticommuting factors costs (-1)^{k(k-1)/2}.
    const std::size_t k = t.majoranas.size();
    const double sign = ((k * (k - 1) / 2) % 2 == 0) ? 1.0 : -1.0;
    out.merge(std::conj(t.coeff) * sign, t.majoranas);
  }
  return out;
}

FermionOperator FermionOperator::operator+(const FermionOperator& other) const {
  FermionOperator out = *this;
  out += other;
  return out;
}

FermionOperator& FermionOperator::operator+=(const FermionOperator& other) {
  if (modes_ == 0) modes_ = other.modes_;
  check_compatible(other);
  for (const auto& t : other.terms_) merge(t.coeff, t.majoranas);
  return *this;
}

FermionOperator FermionOperator::operator-(const FermionOperator& other) const {
  return *this + other * Complex(-1.0);
}

FermionOperator FermionOperator::operator*(const FermionOperator& other) const {
  check_compatible(other);
  FermionOperator out(modes_);
  for (const auto& a : terms_) {
    for (const auto& b : other.terms_) {
      std::vector<unsigned> idx = a.majoranas;
      idx.insert(idx.end(), b.majoranas.begin(), b.majoranas.end());
      out.add_term(a.coeff * b.coeff, std::move(idx));
    }
  }
  return out;
}

FermionOperator FermionOperator::operator*(Complex scalar) const {
  FermionOperator out(modes_);
  for (const auto& t : terms_) out.merge(t.coeff * scalar, t.majoranas);
  return out;
}

std::vector<PauliTerm> encode(const FermionOperator& op, const MajoranaBasis& basis) {
  if (op.modes() != basis.modes) {
    throw DimensionError("operator has " + std::to_string(op.modes()) + " modes, basis has " +
                         std::to_string(basis.modes));
  }
  std::map<std::pair<std::uint64_t, std::uint64_t>, Complex> acc;
  for (const auto& t : op.terms()) {
    PauliString p(basis.qubits());
    for (unsigned a : t.majoranas) p = p * basis.gamma(a);
    acc[{p.xbits(), p.zbits()}] += t.coeff * p.phase_value();
  }
  std::vector<PauliTerm> out;
  for (const auto& [key, coeff] : acc) {
    if (std::abs(coeff) < kDropTolerance) continue;
    out.push_back({coeff, PauliString(basis.qubits(), key.first, key.second)});
  }
  return out;
}

Eigen::MatrixXcd to_dense(std::span<const PauliTerm> terms, unsigned qubits) {
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << qubits);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& t : terms) m += t.coeff * to_dense(t.string);
  return m;
}

std::vector<PauliString> one_body_observables(unsigned modes, const MajoranaBasis& basis) {
  if (modes != basis.modes) throw DimensionError("mode count does not match basis");
  std::vector<PauliString> out;
  out.reserve(static_cast<std::size_t>(modes) * (2 * modes - 1));
  const PauliString i_phase = PauliString(basis.qubits(), 0, 0, 1);
  for (unsigned a = 1; a <= 2 * modes; ++a) {
    for (unsigned b = a + 1; b <= 2 * modes; ++b) {
      out.push_back(i_phase * basis.gamma(a) * basis.gamma(b));
    }
  }
  return out;
}

}  // namespace fast
