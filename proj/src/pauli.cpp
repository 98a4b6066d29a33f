#include "fast/pauli.hpp"

#include <algorithm>
#include <bit>

#include "fast/errors.hpp"

namespace fast {
namespace {

std::uint64_t qubit_mask(unsigned qubits) {
  return qubits >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << qubits) - 1);
}

void check_same_width(const PauliString& a, const PauliString& b) {
  if (a.qubits() != b.qubits()) {
    throw DimensionError("Pauli strings act on " + std::to_string(a.qubits()) + " and " +
                         std::to_string(b.qubits()) + " qubits");
  }
}

}  // namespace

PauliString::PauliString(unsigned qubits) : PauliString(qubits, 0, 0, 0) {}

PauliString::PauliString(unsigned qubits, std::uint64_t xbits, std::uint64_t zbits,
                         std::uint8_t phase)
    : qubits_(qubits), x_(xbits), z_(zbits), phase_(static_cast<std::uint8_t>(phase & 3u)) {
  if (qubits == 0 || qubits > kMaxQubits) {
    throw DimensionError("Pauli string width must be in 1.." + std::to_string(kMaxQubits));
  }
  if ((x_ | z_) & ~qubit_mask(qubits)) {
    throw DimensionError("Pauli string has bits beyond qubit " + std::to_string(qubits));
  }
}

PauliString PauliString::parse(std::string_view text) {
  std::size_t pos = 0;
  std::uint8_t phase = 0;
  if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    if (text[pos] == '-') phase = 2;
    ++pos;
  }
  if (pos < text.size() && text[pos] == 'i') {
    phase = static_cast<std::uint8_t>(phase + 1);
    ++pos;
  }
  const auto letters = text.substr(pos);
  if (letters.empty()) throw DomainError("Pauli text has no letters: '" + std::string(text) + "'");
  if (letters.size() > kMaxQubits) throw DimensionError("Pauli text too long");
  std::uint64_t x = 0, z = 0;
  for (std::size_t k = 0; k < letters.size(); ++k) {
    const std::uint64_t bit = std::uint64_t{1} << k;
    switch (letters[k]) {
      case 'I': break;
      case 'X': x |= bit; break;
      case 'Y': x |= bit; z |= bit; break;
      case 'Z': z |= bit; break;
      default:
        throw DomainError("invalid Pauli letter '" + std::string(1, letters[k]) + "' in '" +
                          std::string(text) + "'");
    }
  }
  return PauliString(static_cast<unsigned>(letters.size()), x, z, phase);
}

PauliString PauliString::single(unsigned qubits, unsigned qubit, char letter) {
  if (qubit >= qubits) throw DimensionError("qubit index out of range");
  const std::uint64_t bit = std::uint64_t{1} << qubit;
  switch (letter) {
    case 'I': return PauliString(qubits);
    case 'X': return PauliString(qubits, bit, 0);
    case 'Y': return PauliString(qubits, bit, bit);
    case 'Z': return PauliString(qubits, 0, bit);
    default: throw DomainError("invalid Pauli letter");
  }
}

Complex PauliString::phase_value() const {
  static constexpr Complex kPhases[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return kPhases[phase_];
}

unsigned PauliString::weight() const { return static_cast<unsigned>(std::popcount(x_ | z_)); }

char PauliString::letter(unsigned qubit) const {
  const bool xb = (x_ >> qubit) & 1u;
  const bool zb = (z_ >> qubit) & 1u;
  if (xb && zb) return 'Y';
  if (xb) return 'X';
  if (zb) return 'Z';
  return 'I';
}

PauliString PauliString::adjoint() const {
  // Letters are Hermitian, so only the phase is conjugated.
  return with_phase(static_cast<std::uint8_t>((4 - phase_) & 3u));
}

PauliString PauliString::tensor(const PauliString& other) const {
  const unsigned q = qubits_ + other.qubits_;
  if (q > kMaxQubits) throw DimensionError("tensor product exceeds 64 qubits");
  return PauliString(q, x_ | (other.x_ << qubits_), z_ | (other.z_ << qubits_),
                     static_cast<std::uint8_t>(phase_ + other.phase_));
}

std::string PauliString::to_string() const {
  std::string out;
  out.reserve(qubits_ + 2);
  out.push_back(phase_ >= 2 ? '-' : '+');
  if (phase_ & 1u) out.push_back('i');
  for (unsigned k = 0; k < qubits_; ++k) out.push_back(letter(k));
  return out;
}

bool operator<(const PauliString& a, const PauliString& b) {
  if (a.qubits_ != b.qubits_) return a.qubits_ < b.qubits_;
  if (a.x_ != b.x_) return a.x_ < b.x_;
  if (a.z_ != b.z_) return a.z_ < b.z_;
  return a.phase_ < b.phase_;
}

PauliString multiply(const PauliString& a, const PauliString& b) {
  check_same_width(a, b);
  // Each string is i^{phase + |x&z|} X^x Z^z. Moving Z^{z_a} past X^{x_b}
  // costs (-1)^{|z_a & x_b|}; converting back to letters removes i^{|x&z|}.
  const std::uint64_t x = a.xbits() ^ b.xbits();
  const std::uint64_t z = a.zbits() ^ b.zbits();
  const int exponent = a.phase() + b.phase() + std::popcount(a.xbits() & a.zbits()) +
                       std::popcount(b.xbits() & b.zbits()) +
                       2 * std::popcount(a.zbits() & b.xbits()) - std::popcount(x & z);
  const auto phase = static_cast<std::uint8_t>(((exponent % 4) + 4) % 4);
  return PauliString(a.qubits(), x, z, phase);
}

bool commutes(const PauliString& a, const PauliString& b) {
  check_same_width(a, b);
  const int overlap =
      std::popcount(a.xbits() & b.zbits()) + std::popcount(a.zbits() & b.xbits());
  return (overlap & 1) == 0;
}

Eigen::MatrixXcd to_dense(const PauliString& p) {
  if (p.qubits() > 14) throw CapacityError("dense Pauli matrix limited to 14 qubits");
  const std::size_t dim = std::size_t{1} << p.qubits();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim),
                                              static_cast<Eigen::Index>(dim));
  static constexpr Complex kPhases[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const int base = p.phase() + std::popcount(p.xbits() & p.zbits());
  for (std::size_t col = 0; col < dim; ++col) {
    const int sign = std::popcount(col & p.zbits()) & 1;
    const std::size_t row = col ^ p.xbits();
    m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) =
        kPhases[(base + 2 * sign) & 3];
  }
  return m;
}

std::size_t PauliStringHash::operator()(const PauliString& p) const noexcept {
  std::size_t h = std::hash<std::uint64_t>{}(p.xbits());
  h ^= std::hash<std::uint64_t>{}(p.zbits()) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h ^= (static_cast<std::size_t>(p.qubits()) << 2) | p.phase();
  return h;
}

CommutationGraph::CommutationGraph(std::size_t nodes) : adjacency_(nodes) {}

bool CommutationGraph::adjacent(std::size_t i, std::size_t j) const {
  const auto& row = adjacency_.at(i);
  return std::binary_search(row.begin(), row.end(), j);
}

std::size_t CommutationGraph::max_degree() const {
  std::size_t best = 0;
  for (const auto& row : adjacency_) best = std::max(best, row.size());
  return best;
}

std::size_t CommutationGraph::edge_count() const {
  std::size_t total = 0;
  for (const auto& row : adjacency_) total += row.size();
  return total / 2;
}

void CommutationGraph::add_edge(std::size_t i, std::size_t j) {
  if (i == j) throw ContractError("commutation graph is irreflexive");
  if (i >= size() || j >= size()) throw DomainError("edge endpoint out of range");
  auto insert = [](std::vector<std::size_t>& row, std::size_t v) {
    auto it = std::lower_bound(row.begin(), row.end(), v);
    if (it != row.end() && *it == v) return false;
    row.insert(it, v);
    return true;
  };
  if (insert(adjacency_[i], j)) insert(adjacency_[j], i);
}

std::vector<std::vector<std::size_t>> Coloring::classes() const {
  std::vector<std::vector<std::size_t>> out(num_colors);
  for (std::size_t node = 0; node < color_of.size(); ++node) out[color_of[node]].push_back(node);
  return out;
}

CommutationGraph build_commutation_graph(std::span<const PauliString> obs) {
  CommutationGraph g(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (!obs[i].is_hermitian()) {
      throw DomainError("observable " + obs[i].to_string() + " is not Hermitian");
    }
    if (obs[i].qubits() != obs.front().qubits()) {
      throw DimensionError("observables act on different qubit counts");
    }
  }
  for (std::size_t i = 0; i < obs.size(); ++i) {
    for (std::size_t j = i + 1; j < obs.size(); ++j) {
      if (!commutes(obs[i], obs[j])) g.add_edge(i, j);
    }
  }
  return g;
}

Coloring greedy_color(const CommutationGraph& g) {
  Coloring c;
  c.color_of.assign(g.size(), 0);
  std::vector<std::size_t> mark;  // mark[color] == node + 1 when a neighbor of node uses it
  for (std::size_t node = 0; node < g.size(); ++node) {
    for (std::size_t nb : g.neighbors(node)) {
      if (nb < node) {
        const std::size_t col = c.color_of[nb];
        if (col >= mark.size()) mark.resize(col + 1, 0);
        mark[col] = node + 1;
      }
    }
    std::size_t col = 0;
    while (col < mark.size() && mark[col] == node + 1) ++col;
    c.color_of[node] = col;
    c.num_colors = std::max(c.num_colors, col + 1);
  }
  return c;
}

bool is_proper(const CommutationGraph& g, const Coloring& c) {
  if (c.color_of.size() != g.size()) return false;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (c.color_of[i] >= c.num_colors) return false;
    for (std::size_t j : g.neighbors(i)) {
      if (c.color_of[i] == c.color_of[j]) return false;
    }
  }
  return true;
}

}  // namespace fast
