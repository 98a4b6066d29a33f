#include "fast/shadows.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>

#include "fast/errors.hpp"

namespace fast {
namespace {

double pattern_value(std::uint64_t pattern, std::size_t k) {
  return ((pattern >> k) & 1u) ? -1.0 : 1.0;
}

double sign_of(const PauliString& p) { return p.phase() == 2 ? -1.0 : 1.0; }

void check_hermitian(std::span<const PauliString> obs, unsigned qubits) {
  for (const auto& p : obs) {
    if (p.qubits() != qubits) throw DimensionError("observable width differs from state width");
    if (!p.is_hermitian()) throw DomainError("observable " + p.to_string() + " is not Hermitian");
  }
}

// Shadow value of one random-Pauli readout.
double shadow_value(const PauliString& p, std::uint64_t bx, std::uint64_t bz, std::uint64_t bits) {
  const std::uint64_t supp = p.support();
  if ((p.xbits() & supp) != (bx & supp) || (p.zbits() & supp) != (bz & supp)) return 0.0;
  const double magnitude = std::pow(3.0, std::popcount(supp));
  const double parity = (std::popcount(bits & supp) & 1) ? -1.0 : 1.0;
  return sign_of(p) * magnitude * parity;
}

}  // namespace

std::uint64_t CircuitSamples::retained() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

double LinearEstimate::stderr() const { return std::sqrt(var_re + var_im); }

std::uint64_t SampleSet::shots_executed() const {
  std::uint64_t total = 0;
  for (const auto& c : circuits_) total += c.executed;
  return total;
}

void SampleSet::claim(std::size_t k) {
  if (k >= slots_.size()) throw DimensionError("observable index out of range");
  if (slots_[k].assigned) {
    throw ContractError("observable " + std::to_string(k) + " already has an estimate");
  }
  slots_[k].assigned = true;
}

void SampleSet::add_circuit(CircuitSamples circuit) {
  if (circuit.values.size() != circuit.counts.size() * circuit.targets.size()) {
    throw DimensionError("circuit value table has the wrong shape");
  }
  circuit.executed = std::max(circuit.executed, circuit.retained());
  const long index = static_cast<long>(circuits_.size());
  for (std::size_t j = 0; j < circuit.targets.size(); ++j) {
    claim(circuit.targets[j]);
    slots_[circuit.targets[j]].circuit = index;
    slots_[circuit.targets[j]].column = j;
  }
  circuits_.push_back(std::move(circuit));
}

void SampleSet::set_fixed(std::size_t k, double value, double variance) {
  claim(k);
  slots_[k].fixed = value;
  slots_[k].fixed_var = variance;
}

double SampleSet::mean(std::size_t k) const {
  const Slot& s = slots_.at(k);
  if (s.circuit < 0) return s.fixed;
  const auto& c = circuits_[static_cast<std::size_t>(s.circuit)];
  const std::uint64_t n = c.retained();
  if (n == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t r = 0; r < c.counts.size(); ++r) {
    acc += static_cast<double>(c.counts[r]) * c.value(r, s.column);
  }
  return acc / static_cast<double>(n);
}

double SampleSet::variance(std::size_t k) const {
  const Slot& s = slots_.at(k);
  if (s.circuit < 0) return s.fixed_var;
  const auto& c = circuits_[static_cast<std::size_t>(s.circuit)];
  const std::uint64_t n = c.retained();
  if (n == 0) return 1.0;
  if (n == 1) return 1.0;
  const double m = mean(k);
  double acc = 0.0;
  for (std::size_t r = 0; r < c.counts.size(); ++r) {
    const double d = c.value(r, s.column) - m;
    acc += static_cast<double>(c.counts[r]) * d * d;
  }
  return acc / static_cast<double>(n - 1) / static_cast<double>(n);
}

std::uint64_t SampleSet::shots(std::size_t k) const {
  const Slot& s = slots_.at(k);
  if (s.circuit < 0) return 0;
  return circuits_[static_cast<std::size_t>(s.circuit)].retained();
}

LinearEstimate SampleSet::linear(std::span<const Complex> coeffs) const {
  if (coeffs.size() != slots_.size()) throw DimensionError("coefficient count mismatch");
  LinearEstimate out;
  for (std::size_t k = 0; k < slots_.size(); ++k) {
    if (slots_[k].circuit >= 0 || coeffs[k] == Complex(0.0)) continue;
    out.mean += coeffs[k] * slots_[k].fixed;
    out.var_re += coeffs[k].real() * coeffs[k].real() * slots_[k].fixed_var;
    out.var_im += coeffs[k].imag() * coeffs[k].imag() * slots_[k].fixed_var;
  }
  for (const auto& c : circuits_) {
    std::vector<Complex> w(c.targets.size());
    bool any = false;
    for (std::size_t j = 0; j < c.targets.size(); ++j) {
      w[j] = coeffs[c.targets[j]];
      any = any || w[j] != Complex(0.0);
    }
    if (!any) continue;
    const std::uint64_t n = c.retained();
    if (n <= 1) {
      double re = 0.0, im = 0.0;
      for (const auto& x : w) {
        re += x.real() * x.real();
        im += x.imag() * x.imag();
      }
      for (std::size_t r = 0; n == 1 && r < c.counts.size(); ++r) {
        if (c.counts[r] == 0) continue;
        for (std::size_t j = 0; j < w.size(); ++j) out.mean += w[j] * c.value(r, j);
      }
      out.var_re += re;
      out.var_im += im;
      continue;
    }
    std::vector<std::size_t> live;
    for (std::size_t j = 0; j < w.size(); ++j) {
      if (w[j] != Complex(0.0)) live.push_back(j);
    }
    std::vector<Complex> row(c.counts.size());
    Complex m = 0.0;
    for (std::size_t r = 0; r < c.counts.size(); ++r) {
      Complex acc = 0.0;
      for (std::size_t j : live) acc += w[j] * c.value(r, j);
      row[r] = acc;
      m += static_cast<double>(c.counts[r]) * acc;
    }
    const double nd = static_cast<double>(n);
    m /= nd;
    double sre = 0.0, sim = 0.0;
    for (std::size_t r = 0; r < c.counts.size(); ++r) {
      const Complex d = row[r] - m;
      sre += static_cast<double>(c.counts[r]) * d.real() * d.real();
      sim += static_cast<double>(c.counts[r]) * d.imag() * d.imag();
    }
    out.mean += m;
    out.var_re += sre / (nd - 1.0) / nd;
    out.var_im += sim / (nd - 1.0) / nd;
  }
  return out;
}

SampleSet sample_groups(const StateVector& state, std::span<const PauliString> obs,
                        const std::vector<std::vector<std::size_t>>& groups,
                        std::span<const std::uint64_t> shots, Rng& rng,
                        std::span<const std::uint64_t> executed) {
  if (shots.size() != groups.size()) throw DimensionError("one shot count per group required");
  if (!executed.empty() && executed.size() != groups.size()) {
    throw DimensionError("one executed count per group required");
  }
  SampleSet set(obs.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::vector<PauliString> members;
    members.reserve(groups[g].size());
    for (std::size_t k : groups[g]) members.push_back(obs[k]);
    CircuitSamples circuit;
    circuit.targets = groups[g];
    circuit.executed = executed.empty() ? shots[g] : executed[g];
    if (shots[g] > 0) {
      const auto dist = commuting_set_distribution(state, members);
      std::vector<double> probs(dist.size());
      for (std::size_t i = 0; i < dist.size(); ++i) probs[i] = dist[i].probability;
      const auto counts = rng.multinomial(shots[g], probs);
      for (std::size_t i = 0; i < dist.size(); ++i) {
        if (counts[i] == 0) continue;
        circuit.counts.push_back(counts[i]);
        for (std::size_t j = 0; j < members.size(); ++j) {
          circuit.values.push_back(pattern_value(dist[i].pattern, j));
        }
      }
    } else {
      check_commuting_set(members, state.qubits());
    }
    set.add_circuit(std::move(circuit));
  }
  return set;
}

SampleSet sample_shadows(const StateVector& state, std::span<const PauliString> obs,
                         std::uint64_t shots, Rng& rng, std::uint64_t executed) {
  check_hermitian(obs, state.qubits());
  const unsigned q = state.qubits();
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::uint64_t> settings;
  for (std::uint64_t s = 0; s < shots; ++s) {
    std::uint64_t bx = 0, bz = 0;
    for (unsigned k = 0; k < q; ++k) {
      const std::uint64_t b = std::uint64_t{1} << k;
      switch (rng.below(3)) {
        case 0: bx |= b; break;
        case 1: bx |= b; bz |= b; break;
        default: bz |= b; break;
      }
    }
    ++settings[{bx, bz}];
  }
  CircuitSamples circuit;
  circuit.targets.resize(obs.size());
  std::iota(circuit.targets.begin(), circuit.targets.end(), std::size_t{0});
  circuit.executed = executed == 0 ? shots : executed;
  for (const auto& [basis, count] : settings) {
    const auto probs = pauli_basis_distribution(state, basis.first, basis.second);
    const auto counts = rng.multinomial(count, probs);
    for (std::size_t bits = 0; bits < counts.size(); ++bits) {
      if (counts[bits] == 0) continue;
      circuit.counts.push_back(counts[bits]);
      for (const auto& p : obs) {
        circuit.values.push_back(shadow_value(p, basis.first, basis.second, bits));
      }
    }
  }
  SampleSet set(obs.size());
  set.add_circuit(std::move(circuit));
  return set;
}

SampleSet sample_bell(const StateVector& state, std::span<const PauliString> obs,
                      std::uint64_t shots, Rng& rng, std::uint64_t executed) {
  check_hermitian(obs, state.qubits());
  const unsigned n = state.qubits();
  const std::uint64_t low = (std::uint64_t{1} << n) - 1;
  CircuitSamples circuit;
  circuit.targets.resize(obs.size());
  std::iota(circuit.targets.begin(), circuit.targets.end(), std::size_t{0});
  circuit.executed = executed == 0 ? shots : executed;
  if (shots > 0) {
    const auto probs = bell_distribution(state);
    const auto counts = rng.multinomial(shots, probs);
    for (std::size_t idx = 0; idx < counts.size(); ++idx) {
      if (counts[idx] == 0) continue;
      circuit.counts.push_back(counts[idx]);
      for (const auto& p : obs) {
        circuit.values.push_back(bell_value(p, idx & low, idx >> n));
      }
    }
  }
  SampleSet set(obs.size());
  set.add_circuit(std::move(circuit));
  return set;
}

SampleSet exact_expectations(const StateVector& state, std::span<const PauliString> obs) {
  check_hermitian(obs, state.qubits());
  SampleSet set(obs.size());
  for (std::size_t k = 0; k < obs.size(); ++k) set.set_fixed(k, expectation(state, obs[k]));
  return set;
}

std::vector<ShadowEstimate> to_estimates(const SampleSet& set, std::span<const PauliString> obs) {
  if (set.size() != obs.size()) throw DimensionError("sample set and observable list differ");
  std::vector<ShadowEstimate> out;
  out.reserve(obs.size());
  for (std::size_t k = 0; k < obs.size(); ++k) {
    out.push_back({obs[k], set.mean(k), std::sqrt(set.variance(k)),
                   static_cast<std::size_t>(set.shots(k))});
  }
  return out;
}

std::vector<ShadowEstimate> estimate_by_shadows(const StateVector& state,
                                                std::span<const PauliString> obs,
                                                std::size_t shots, Rng& rng) {
  return to_estimates(sample_shadows(state, obs, shots, rng), obs);
}

GroupEstimate estimate_by_groups(const StateVector& state, std::span<const PauliString> obs,
                                 std::size_t shots_per_group, Rng& rng) {
  GroupEstimate out;
  out.coloring = greedy_color(build_commutation_graph(obs));
  const auto groups = out.coloring.classes();
  const std::vector<std::uint64_t> shots(groups.size(), shots_per_group);
  const SampleSet set = sample_groups(state, obs, groups, shots, rng);
  out.estimates = to_estimates(set, obs);
  out.circuit_count = set.circuit_count();
  return out;
}

std::vector<std::size_t> MagnitudeTable::survivors() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (survives(k)) out.push_back(k);
  }
  return out;
}

MagnitudeTable magnitudes_from_bell(const SampleSet& bell, std::span<const PauliString> obs,
                                    double threshold) {
  if (bell.size() != obs.size()) throw DimensionError("Bell samples and observables differ");
  MagnitudeTable table;
  table.observables.assign(obs.begin(), obs.end());
  table.threshold = threshold;
  table.shots = bell.circuit_count() > 0 ? bell.circuits()[0].retained() : 0;
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const double sq = bell.mean(k);
    const double var = bell.variance(k);
    const double m = std::sqrt(std::max(0.0, sq));
    table.entries.push_back(std::min(1.0, m));
    table.entry_var.push_back(m > 1e-12 ? std::min(1.0, var / (4.0 * sq)) : std::sqrt(var));
  }
  return table;
}

MagnitudeTable bell_magnitudes(const StateVector& state, std::span<const PauliString> obs,
                               std::size_t shots, Rng& rng, double threshold) {
  if (shots == 0) throw DomainError("Bell magnitude estimation needs at least one shot");
  return magnitudes_from_bell(sample_bell(state, obs, shots, rng), obs, threshold);
}

std::vector<PauliString> chain_observables(std::span<const PauliString> ordered) {
  std::vector<PauliString> out;
  for (std::size_t i = 0; i + 1 < ordered.size(); ++i) {
    out.push_back(ordered[i].tensor(ordered[i + 1]));
  }
  return out;
}

std::vector<int> propagate_signs(int anchor_sign, std::span<const double> pair_products) {
  std::vector<int> signs{anchor_sign >= 0 ? 1 : -1};
  for (double p : pair_products) signs.push_back(p < 0.0 ? -signs.back() : signs.back());
  return signs;
}

SignChain run_chain(const StateVector& state, std::span<const PauliString> ordered,
                    const std::string& name, double eps, std::uint64_t anchor_shots,
                    std::uint64_t chain_shots, Rng& rng, bool strict,
                    std::uint64_t anchor_executed, std::uint64_t chain_executed) {
  SignChain chain;
  if (ordered.empty()) return chain;
  check_hermitian(ordered, state.qubits());
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (commutes(ordered[i], ordered[j])) {
        throw ContractError("chain " + name + " members " + std::to_string(j) + " and " +
                            std::to_string(i) + " commute");
      }
    }
  }

  const std::vector<std::vector<std::size_t>> single{{0}};
  const std::uint64_t a_shots[] = {anchor_shots};
  const std::uint64_t a_exec[] = {std::max(anchor_shots, anchor_executed)};
  const SampleSet anchor = sample_groups(state, ordered.first(1), single, a_shots, rng, a_exec);
  chain.anchor_estimate = anchor.mean(0);
  chain.circuits = 1;
  chain.shots = a_exec[0];
  if (chain.anchor_estimate == 0.0) {
    chain.warnings.push_back("chain " + name + ": anchor estimate is exactly zero; sign taken as +1");
  }
  chain.anchor_sign = chain.anchor_estimate < 0.0 ? -1 : 1;

  if (ordered.size() > 1) {
    const auto pairs = chain_observables(ordered);
    const StateVector two = state.tensor(state);
    std::vector<std::vector<std::size_t>> all(1);
    for (std::size_t k = 0; k < pairs.size(); ++k) all[0].push_back(k);
    const std::uint64_t c_shots[] = {chain_shots};
    const std::uint64_t c_exec[] = {std::max(chain_shots, chain_executed)};
    const SampleSet links = sample_groups(two, pairs, all, c_shots, rng, c_exec);
    chain.circuits += 1;
    chain.shots += c_exec[0];
    const double floor = eps * eps / 8.0;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const double v = links.mean(k);
      chain.pair_products.push_back(v);
      if (std::abs(v) < floor) {
        if (strict) throw UnreliableLinkError(name, k, v);
        chain.warnings.push_back("unreliable link in chain " + name + " at position " +
                                 std::to_string(k));
      } else if (v == 0.0) {
        chain.warnings.push_back("unreliable link in chain " + name + " at position " +
                                 std::to_string(k) + ": zero estimate read as +1");
      }
    }
  }
  chain.recovered_signs = propagate_signs(chain.anchor_sign, chain.pair_products);
  return chain;
}

ChainedSigns chained_signs(const StateVector& state, std::span<const PauliString> survivors_x,
                           std::span<const PauliString> survivors_y, double eps,
                           std::size_t anchor_shots, std::size_t chain_shots, Rng& rng) {
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  ChainedSigns out;
  out.x = run_chain(state, survivors_x, "X", eps, anchor_shots, chain_shots, rng);
  out.y = run_chain(state, survivors_y, "Y", eps, anchor_shots, chain_shots, rng);
  return out;
}

ChainedSigns chained_signs(const StateVector& state, std::span<const PauliString> survivors_x,
                           std::span<const PauliString> survivors_y, double eps,
                           std::size_t shots, Rng& rng) {
  return chained_signs(state, survivors_x, survivors_y, eps, shots, shots, rng);
}

}  // namespace fast
