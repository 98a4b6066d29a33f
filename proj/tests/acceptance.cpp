// Acceptance suite. `acceptance` runs every criterion; `acceptance --criterion k`
// runs one. Prints one PASS/FAIL line per criterion and exits non-zero on any FAIL.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "fast/errors.hpp"
#include "fast/fast.hpp"
#include "fast/harness.hpp"
#include "fast/shadows.hpp"
#include "oracle.hpp"

using fast::Complex;
using fast::CorrelationKind;
using fast::MappingKind;
using fast::PauliString;
using fast::StateVector;
using fast::Strategy;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

fast::ModelSpec hubbard(unsigned n, double u = 2.0, double mu = 0.0) {
  fast::ModelSpec s;
  s.n = n;
  s.U = u;
  s.mu = mu;
  return s;
}

constexpr MappingKind kMappings[] = {MappingKind::JW, MappingKind::BK, MappingKind::TT};

// Dense e^{-iHt}.
Eigen::MatrixXcd propagator(const Eigen::MatrixXcd& h, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  Eigen::VectorXcd ph(es.eigenvalues().size());
  for (Eigen::Index k = 0; k < ph.size(); ++k) ph[k] = std::exp(Complex(0, -es.eigenvalues()[k] * t));
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

// 1. Analytic reformulation exactness ---------------------------------------

Outcome criterion1() {
  double worst = 0.0;
  std::size_t checked = 0;
  for (unsigned n : {2u, 3u, 4u}) {
    const auto spec = hubbard(n, 2.0, 0.3);
    for (MappingKind mapping : kMappings) {
      const auto gs = fast::ground_state(spec, mapping);
      const auto ham = fast::build_hamiltonian(spec, mapping);
      const fast::EvolutionCache cache(ham);
      const auto basis = fast::majorana_basis(n, mapping);
      fast::EngineOptions opt;
      opt.mapping = mapping;
      opt.mode = fast::EstimationMode::analytic;
      for (double t : {0.0, 0.3, 1.0}) {
        // Operator level: every plan term on Majorana components.
        const Eigen::MatrixXcd u = propagator(ham.dense(), t);
        const Eigen::VectorXcd& psi = gs.ground_state.amplitudes();
        for (unsigned a = 1; a <= 2 * n; ++a) {
          const PauliString pa = basis.gamma(a);
          const Eigen::MatrixXcd at = u.adjoint() * fast::to_dense(pa) * u;
          for (unsigned b = 1; b <= 2 * n; ++b) {
            const PauliString pb = basis.gamma(b);
            const Eigen::MatrixXcd bm = fast::to_dense(pb);
            const Complex comm = psi.dot((at * bm - bm * at) * psi);
            const Complex anti = psi.dot((at * bm + bm * at) * psi);
            worst = std::max(worst, std::abs(fast::evaluate_exact(fast::reformulate_commutator(pa, pb, t),
                                                                  gs.ground_state, cache) - comm));
            for (auto br : {fast::Branch::plus, fast::Branch::minus}) {
              worst = std::max(worst, std::abs(fast::evaluate_exact(
                                                   fast::reformulate_anticommutator(pa, pb, t, br),
                                                   gs.ground_state, cache) - anti));
            }
            checked += 3;
          }
        }
        // Fermionic level: full FAST 1 and FAST 2 matrices.
        const auto o1 = fast::oracle_correlations(spec, mapping, CorrelationKind::commutator,
                                                  fast::TargetSet::all, {t});
        const auto f1 = fast::fast1(gs.ground_state, cache, n, t, opt);
        for (std::size_t k = 0; k < f1.entries.size(); ++k) {
          worst = std::max(worst, std::abs(f1.entries[k].raw - o1.entries[k].commutator));
        }
        const auto o2 = fast::oracle_correlations(spec, mapping, CorrelationKind::anticommutator,
                                                  fast::TargetSet::all, {t});
        const auto f2 = fast::fast2(gs.ground_state, cache, n, t, opt);
        for (std::size_t k = 0; k < f2.entries.size(); ++k) {
          worst = std::max(worst, std::abs(f2.entries[k].raw - o2.entries[k].anticommutator));
        }
        checked += f1.entries.size() + f2.entries.size();
      }
    }
  }
  return {worst <= 1e-9, std::to_string(checked) + " values, max |err| = " + fmt("%.2e", worst)};
}

// 2. CAR identity at t = 0 ----------------------------------------------------

Outcome criterion2() {
  const unsigned n = 4;
  const auto spec = hubbard(n);
  bool pass = true;
  std::string detail;
  for (MappingKind mapping : kMappings) {
    const auto gs = fast::ground_state(spec, mapping);
    const fast::EvolutionCache cache(fast::build_hamiltonian(spec, mapping));
    fast::EngineOptions opt;
    opt.mapping = mapping;
    opt.eps = 0.1;
    opt.seed = 2;
    opt.shots.per_circuit = 100000;
    opt.shots.shadow = 100000;
    const auto g = fast::fast2(gs.ground_state, cache, n, 0.0, opt);
    double worst_z = 0.0;
    int bad = 0;
    for (const auto& e : g.entries) {
      const Complex want = e.indices[0] == e.indices[1] ? Complex(0, -1) : Complex(0);
      const double err = std::abs(e.value - want);
      worst_z = std::max(worst_z, err / e.stderr);
      bad += err > 3 * e.stderr + 1e-12;
    }
    pass = pass && bad == 0;
    detail += fast::to_string(mapping) + "/" + fast::to_string(g.choice.strategy) + ": " +
              std::to_string(16 - bad) + "/16 within 3 stderr (max " + fmt("%.2f", worst_z) +
              " stderr); ";
  }
  return {pass, detail};
}

// 3. End-to-end accuracy of FAST 1 ------------------------------------------

Outcome criterion3() {
  fast::ExperimentConfig cfg;
  cfg.model = hubbard(4);
  cfg.mapping = MappingKind::JW;
  cfg.kind = CorrelationKind::commutator;
  cfg.eps = 0.1;
  cfg.times = {0.5};
  double worst_fraction = 1.0, worst_err = 0.0;
  std::size_t within = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    cfg.seed = seed;
    const auto r = fast::run_experiment(cfg);
    worst_fraction = std::min(worst_fraction, r.fraction_within_eps);
    worst_err = std::max(worst_err, r.max_abs_error);
    for (const auto& row : r.rows) within += row.error <= cfg.eps;
    total += r.rows.size();
  }
  const double overall = static_cast<double>(within) / static_cast<double>(total);
  return {worst_fraction >= 0.95 && overall >= 0.95,
          "20 seeds x 256 entries: overall " + fmt("%.4f", overall) + ", worst seed " +
              fmt("%.4f", worst_fraction) + ", max |err| " + fmt("%.4f", worst_err)};
}

// 4. Majority rule -----------------------------------------------------------

// +1 eigenvector of sum_a s_a gamma_a / sqrt(2n): <gamma_a> = s_a / sqrt(2n).
StateVector engineered_state(const fast::MajoranaBasis& basis, const std::vector<int>& signs,
                             std::uint64_t seed) {
  const unsigned q = basis.qubits();
  const Eigen::Index dim = Eigen::Index{1} << q;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (unsigned a = 1; a <= 2 * q; ++a) m += double(signs[a - 1]) * fast::to_dense(basis.gamma(a));
  m /= std::sqrt(2.0 * q);
  std::mt19937_64 g(seed);
  Eigen::VectorXcd v = oracle::random_state(g, q);
  v = 0.5 * (v + m * v);
  return StateVector::normalized(q, v);
}

Outcome criterion4() {
  const unsigned n = 4;
  const auto basis = fast::majorana_basis(n, MappingKind::JW);
  const auto spec = hubbard(n);
  const auto ham = fast::build_hamiltonian(spec, MappingKind::JW);
  const fast::EvolutionCache cache(ham);
  const StateVector ground = fast::ground_state(spec, MappingKind::JW).ground_state;
  std::vector<int> signs(2 * n);
  for (unsigned a = 0; a < 2 * n; ++a) signs[a] = a % 3 == 0 ? -1 : 1;
  const StateVector skewed = engineered_state(basis, signs, 17);

  // B candidates: Majoranas and one-body strings, on two states.
  std::vector<PauliString> bs;
  for (unsigned a = 1; a <= 2 * n; ++a) bs.push_back(basis.gamma(a));
  const auto one_body = fast::one_body_observables(n, basis);
  bs.insert(bs.end(), one_body.begin(), one_body.end());

  const std::size_t runs = 200, shots = 4000;
  std::size_t close = 0, retained_ok = 0;
  double worst = 0.0;
  for (std::size_t r = 0; r < runs; ++r) {
    const StateVector& state = r % 2 ? skewed : ground;
    const PauliString& b = bs[(r * 7) % bs.size()];
    fast::Rng rng(fast::derive_seed(4, r));
    std::vector<int> bits(shots);
    for (auto& bit : bits) bit = fast::prepare_rho_pm(state, b, cache, 0.5, rng).bit;
    const auto sel = fast::majority_select(bits);
    const auto w = fast::branch_weights(state, b);
    const double dev = std::max(std::abs(sel.c_plus_sq_hat - w.plus), std::abs(sel.c_minus_sq_hat - w.minus));
    worst = std::max(worst, dev);
    close += dev <= 0.05;
    retained_ok += sel.retained() >= shots / 2;
  }
  return {close >= 198 && retained_ok == runs,
          std::to_string(close) + "/200 runs within 0.05 (max dev " + fmt("%.4f", worst) + "), " +
              std::to_string(retained_ok) + "/200 retained >= N_s/2"};
}

// 5. Chained sign recovery ---------------------------------------------------

Outcome criterion5() {
  const unsigned n = 6;
  const double required = 0.4;
  const auto basis = fast::majorana_basis(n, MappingKind::JW);
  std::vector<PauliString> gammas;
  for (unsigned a = 1; a <= 2 * n; ++a) gammas.push_back(basis.gamma(a));

  // Engineering step: the best uniform magnitude any state can reach. The
  // 2n Majoranas pairwise anticommute, so sum_a <gamma_a>^2 <= 1 and a uniform
  // magnitude cannot exceed 1/sqrt(2n); the +1 eigenvector of
  // sum_a s_a gamma_a / sqrt(2n) attains it.
  double min_magnitude = 1.0, square_sum = 0.0;
  {
    std::vector<int> signs(2 * n, 1);
    const StateVector probe = engineered_state(basis, signs, 1);
    for (const auto& g : gammas) {
      const double e = fast::expectation(probe, g);
      min_magnitude = std::min(min_magnitude, std::abs(e));
      square_sum += e * e;
    }
  }
  const bool precondition = min_magnitude >= required;

  // Sign recovery at the largest reachable magnitude.
  const double eps = 0.3;
  int successes = 0, circuit_ok = 0;
  for (std::uint64_t run = 0; run < 100; ++run) {
    std::mt19937_64 g(fast::derive_seed(5, run));
    std::vector<int> signs(2 * n);
    for (auto& s : signs) s = g() % 2 ? 1 : -1;
    const StateVector state = engineered_state(basis, signs, g());
    fast::Rng rng(fast::derive_seed(55, run));
    const auto table = fast::bell_magnitudes(state, gammas, 40000, rng, 0.75 * eps);
    std::vector<PauliString> sx, sy;
    std::vector<int> want_x, want_y;
    for (std::size_t k = 0; k < gammas.size(); ++k) {
      if (!table.survives(k)) continue;
      (k % 2 == 0 ? sx : sy).push_back(gammas[k]);
      (k % 2 == 0 ? want_x : want_y).push_back(signs[k]);
    }
    try {
      const auto res = fast::chained_signs(state, sx, sy, eps, 4000, 20000, rng);
      const bool all = sx.size() + sy.size() == 2 * n && res.x.recovered_signs == want_x &&
                       res.y.recovered_signs == want_y;
      successes += all;
      circuit_ok += res.x.circuits == 2 && res.y.circuits == 2;
    } catch (const fast::UnreliableLinkError&) {
    }
  }
  const bool pass = precondition && successes >= 99 && circuit_ok == 100;
  std::string detail = "precondition ";
  detail += precondition ? "met" : "UNATTAINABLE";
  detail += ": max uniform |<gamma>| = " + fmt("%.4f", min_magnitude) + " < " + fmt("%.1f", required) +
            " (sum <gamma>^2 = " + fmt("%.3f", square_sum) + " <= 1); at that magnitude " +
            std::to_string(successes) + "/100 runs recovered all 12 signs, " +
            std::to_string(circuit_ok) + "/100 used 2 anchor + 2 chain circuits";
  return {pass, detail};
}

// 6. Bell thresholding ---------------------------------------------------------

Outcome criterion6() {
  const unsigned n = 4;
  const double eps = 0.2;
  const auto basis = fast::majorana_basis(n, MappingKind::JW);
  std::vector<PauliString> obs;
  for (unsigned a = 1; a <= 2 * n; ++a) obs.push_back(basis.gamma(a));
  const auto one_body = fast::one_body_observables(n, basis);
  obs.insert(obs.end(), one_body.begin(), one_body.end());

  std::vector<int> signs(2 * n, 1);
  signs[1] = signs[4] = -1;
  const std::vector<StateVector> states = {
      fast::ground_state(hubbard(n), MappingKind::JW).ground_state,
      engineered_state(basis, signs, 3)};
  const fast::ShotTable shots;
  const std::size_t runs = 200;
  std::size_t small = 0, large = 0;
  double worst_discard = 1.0, worst_keep = 1.0;
  for (std::size_t s = 0; s < states.size(); ++s) {
    std::vector<double> truth;
    for (const auto& p : obs) truth.push_back(std::abs(fast::expectation(states[s], p)));
    std::vector<std::size_t> kept(obs.size(), 0);
    for (std::size_t r = 0; r < runs; ++r) {
      fast::Rng rng(fast::derive_seed(6, s, r));
      const auto table = fast::bell_magnitudes(states[s], obs, shots.bell, rng, 0.75 * eps);
      for (std::size_t k = 0; k < obs.size(); ++k) kept[k] += table.survives(k);
    }
    for (std::size_t k = 0; k < obs.size(); ++k) {
      const double rate = static_cast<double>(kept[k]) / runs;
      if (truth[k] <= eps / 4) {
        ++small;
        worst_discard = std::min(worst_discard, 1.0 - rate);
      } else if (truth[k] >= eps) {
        ++large;
        worst_keep = std::min(worst_keep, rate);
      }
    }
  }
  return {small > 0 && large > 0 && worst_discard >= 0.99 && worst_keep >= 0.99,
          std::to_string(small) + " small observables discarded in >= " + fmt("%.3f", worst_discard) +
              " of runs, " + std::to_string(large) + " large kept in >= " + fmt("%.3f", worst_keep) +
              " (" + std::to_string(shots.bell) + " Bell shots)"};
}

// 7. Circuit accounting and scaling -----------------------------------------

Outcome criterion7() {
  // Run logs against closed forms in sampled mode.
  bool counts_ok = true;
  std::size_t compared = 0;
  for (unsigned n : {2u, 3u}) {
    for (auto [kind, strategy, mapping] :
         {std::tuple{CorrelationKind::commutator, Strategy::mmc, MappingKind::JW},
          std::tuple{CorrelationKind::commutator, Strategy::dc, MappingKind::TT},
          std::tuple{CorrelationKind::commutator, Strategy::brute_force, MappingKind::BK},
          std::tuple{CorrelationKind::anticommutator, Strategy::nm, MappingKind::JW},
          std::tuple{CorrelationKind::anticommutator, Strategy::dc, MappingKind::TT}}) {
      const auto spec = hubbard(n);
      const auto gs = fast::ground_state(spec, mapping);
      const fast::EvolutionCache cache(fast::build_hamiltonian(spec, mapping));
      fast::EngineOptions opt;
      opt.mapping = mapping;
      opt.strategy = strategy;
      opt.seed = n;
      opt.shots.per_circuit = 200;
      opt.shots.shadow = 200;
      const auto [a, b] = fast::request_targets(spec, kind, fast::TargetSet::all);
      const auto m = fast::estimate_correlations(kind, a, b, gs.ground_state, cache, 0.5, opt);
      const auto layout = strategy == Strategy::brute_force ? Strategy::nm : strategy;
      const auto closed = fast::closed_form_circuits(layout, kind, m.b_components, m.b_count,
                                                     m.family_size, m.a_count, m.colors);
      counts_ok = counts_ok && closed.physical == m.circuits_total &&
                  closed.fermionic == m.fermionic_circuits;
      ++compared;
    }
  }

  fast::ScalingConfig cfg;
  cfg.model = hubbard(2);
  cfg.n_values = {2, 4, 6, 8};
  cfg.eps = 0.3;
  cfg.seed = 7;
  cfg.studies = {{"fast1_tt_dc", CorrelationKind::commutator, Strategy::dc, MappingKind::TT, 2.0},
                 {"fast2_jw_nm", CorrelationKind::anticommutator, Strategy::nm, MappingKind::JW, 2.0},
                 {"brute_force_commutator", CorrelationKind::commutator, Strategy::brute_force,
                  MappingKind::JW, 4.0}};
  const auto report = fast::scaling_study(cfg);
  std::string detail = std::to_string(compared) + " sampled runs match closed forms: ";
  detail += counts_ok ? "yes" : "NO";
  for (const auto& f : report.fits) {
    detail += "; " + f.label + " slope " + fmt("%.3f", f.slope) + " (want " + fmt("%.0f", f.expected) + ")";
  }
  std::vector<double> xs, ys;
  for (const auto& p : report.points) {
    if (p.label != "brute_force_commutator") continue;
    xs.push_back(p.n);
    ys.push_back(static_cast<double>(p.circuits));
  }
  detail += "; brute-force physical-circuit slope " + fmt("%.3f", fast::loglog_slope(xs, ys)) + " (info)";
  return {counts_ok && report.passed(), detail};
}

// 8. Algebra suites ------------------------------------------------------------

// Independent commutation rule: count qubits where both letters are non-identity and differ.
bool letters_commute(const std::string& a, const std::string& b) {
  int clashes = 0;
  for (std::size_t k = 0; k < a.size(); ++k) clashes += a[k] != 'I' && b[k] != 'I' && a[k] != b[k];
  return clashes % 2 == 0;
}

std::string letters_of(const PauliString& p) {
  std::string s;
  for (unsigned k = 0; k < p.qubits(); ++k) s.push_back(p.letter(k));
  return s;
}

Outcome criterion8() {
  std::size_t failures = 0, cases = 0;
  auto check_pair = [&](const std::string& la, const std::string& lb) {
    const PauliString a = PauliString::parse(la), b = PauliString::parse(lb);
    const oracle::Matrix ma = oracle::pauli(la), mb = oracle::pauli(lb);
    const bool product_ok = (fast::to_dense(a * b) - ma * mb).cwiseAbs().maxCoeff() < 1e-12;
    const bool comm_ok = fast::commutes(a, b) == ((ma * mb - mb * ma).cwiseAbs().maxCoeff() < 1e-12);
    failures += !(product_ok && comm_ok);
    ++cases;
  };
  static const char kLetters[] = "IXYZ";
  for (unsigned q = 1; q <= 3; ++q) {
    const std::size_t count = std::size_t{1} << (2 * q);
    auto word = [&](std::size_t code) {
      std::string s;
      for (unsigned k = 0; k < q; ++k) s.push_back(kLetters[(code >> (2 * k)) & 3]);
      return s;
    };
    for (std::size_t i = 0; i < count; ++i)
      for (std::size_t j = 0; j < count; ++j) check_pair(word(i), word(j));
  }
  std::mt19937_64 g(8);
  const std::string phases[] = {"", "-", "i", "-i"};
  for (int k = 0; k < 1000; ++k) {
    check_pair(phases[g() % 4] + oracle::random_letters(g, 4), phases[g() % 4] + oracle::random_letters(g, 4));
  }
  const std::size_t pauli_cases = cases, pauli_failures = failures;

  // Pair products of anticommuting lists commute.
  std::size_t list_failures = 0;
  for (int list = 0; list < 500; ++list) {
    const unsigned q = 3 + g() % 4;
    const std::size_t want = 2 + g() % 7;
    std::vector<PauliString> members;
    for (int attempt = 0; members.size() < want && attempt < 5000; ++attempt) {
      const auto p = PauliString::parse(oracle::random_letters(g, q));
      if (p.is_identity()) continue;
      bool ok = true;
      for (const auto& m : members) ok = ok && !letters_commute(letters_of(m), letters_of(p));
      if (ok) members.push_back(p);
    }
    const auto chain = fast::chain_observables(members);
    bool ok = chain.size() + 1 == members.size();
    for (std::size_t i = 0; i < chain.size(); ++i)
      for (std::size_t j = i + 1; j < chain.size(); ++j)
        ok = ok && letters_commute(letters_of(chain[i]), letters_of(chain[j]));
    list_failures += !ok;
  }

  // Greedy coloring is proper.
  std::size_t color_failures = 0;
  for (int graph = 0; graph < 500; ++graph) {
    const std::size_t nodes = 1 + g() % 40;
    const double p = std::uniform_real_distribution<double>(0.0, 1.0)(g);
    fast::CommutationGraph cg(nodes);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < nodes; ++i)
      for (std::size_t j = i + 1; j < nodes; ++j)
        if (std::uniform_real_distribution<double>(0.0, 1.0)(g) < p) {
          cg.add_edge(i, j);
          edges.emplace_back(i, j);
        }
    const auto coloring = fast::greedy_color(cg);
    bool ok = coloring.color_of.size() == nodes;
    for (const auto& [i, j] : edges) ok = ok && coloring.color_of[i] != coloring.color_of[j];
    color_failures += !ok;
  }
  return {pauli_failures + list_failures + color_failures == 0,
          std::to_string(pauli_cases) + " Pauli cases (" + std::to_string(pauli_failures) +
              " failures), 500 anticommuting lists (" + std::to_string(list_failures) +
              " failures), 500 graphs (" + std::to_string(color_failures) + " failures)"};
}

// 9. Reproducibility -----------------------------------------------------------

std::string file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion9() {
  namespace fs = std::filesystem;
  std::vector<std::string> configs;
  for (const auto& entry : fs::directory_iterator(FAST_CONFIG_DIR)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("golden_", 0) == 0 && entry.path().extension() == ".json") {
      configs.push_back(entry.path().string());
    }
  }
  std::sort(configs.begin(), configs.end());
  const fs::path scratch = fs::temp_directory_path() / ("fast_acceptance_" + std::to_string(::getpid()));
  bool pass = !configs.empty();
  for (const auto& path : configs) {
    auto cfg = fast::load_config(path);
    std::vector<std::string> outputs;
    for (std::size_t workers : {1, 8, 8}) {
      cfg.max_workers = workers;
      const auto stem = (scratch / (std::to_string(outputs.size()))).string();
      const auto paths = fast::write_artifacts(fast::run_experiment(cfg), stem);
      outputs.push_back(file_bytes(paths.csv));
    }
    pass = pass && !outputs[0].empty() && outputs[0] == outputs[1] && outputs[1] == outputs[2];
  }
  fs::remove_all(scratch);
  return {pass, std::to_string(configs.size()) +
                    " golden configs, CSV bytes identical across 2 runs and 1 vs 8 workers: " +
                    (pass ? "yes" : "NO")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-9)")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);

  const std::function<Outcome()> criteria[] = {criterion1, criterion2, criterion3,
                                                criterion4, criterion5, criterion6,
                                                criterion7, criterion8, criterion9};
  int failed = 0;
  for (int k = 1; k <= 9; ++k) {
    if (only != 0 && k != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[k - 1]();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "criterion " << k << ": " << (out.pass ? "PASS" : "FAIL") << "  " << out.detail
              << "  [" << fmt("%.1f", secs) << " s]" << std::endl;
    failed += !out.pass;
  }
  return failed == 0 ? 0 : 1;
}
