#include "doctest.h"

#include <cmath>
#include <random>

#include "fast/errors.hpp"
#include "fast/fast.hpp"
#include "oracle.hpp"

using fast::Complex;
using fast::CorrelationKind;
using fast::MappingKind;
using fast::PauliString;
using fast::StateVector;
using fast::Strategy;

namespace {

// Random hopping plus nearest-neighbour density interaction.
struct Model {
  unsigned n;
  Eigen::MatrixXcd h;  // n x n Hermitian hopping matrix
  double u;
};

Model random_model(unsigned n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> gauss;
  Model m{n, Eigen::MatrixXcd::Zero(n, n), 0.7};
  for (unsigned i = 0; i < n; ++i) {
    m.h(i, i) = gauss(g);
    for (unsigned j = i + 1; j < n; ++j) {
      m.h(i, j) = Complex(gauss(g), gauss(g));
      m.h(j, i) = std::conj(m.h(i, j));
    }
  }
  return m;
}

fast::FermionOperator model_operator(const Model& m) {
  fast::FermionOperator op(m.n);
  for (unsigned i = 1; i <= m.n; ++i) {
    for (unsigned j = 1; j <= m.n; ++j) op += fast::FermionOperator::hopping(m.n, i, j) * m.h(i - 1, j - 1);
  }
  for (unsigned i = 1; i < m.n; ++i) {
    op += fast::FermionOperator::number(m.n, i) * fast::FermionOperator::number(m.n, i + 1) * m.u;
  }
  return op;
}

// Dense reference on the Jordan-Wigner register.
struct Reference {
  unsigned n;
  std::vector<oracle::Matrix> c;
  Eigen::MatrixXcd hamiltonian;
  Eigen::VectorXcd ground;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver;

  explicit Reference(const Model& m) : n(m.n) {
    for (unsigned j = 1; j <= n; ++j) c.push_back(oracle::annihilation_jw(n, j));
    const Eigen::Index dim = Eigen::Index{1} << n;
    hamiltonian = Eigen::MatrixXcd::Zero(dim, dim);
    for (unsigned i = 0; i < n; ++i)
      for (unsigned j = 0; j < n; ++j) hamiltonian += m.h(i, j) * c[i].adjoint() * c[j];
    for (unsigned i = 0; i + 1 < n; ++i)
      hamiltonian += m.u * (c[i].adjoint() * c[i]) * (c[i + 1].adjoint() * c[i + 1]);
    solver.compute(hamiltonian);
    ground = solver.eigenvectors().col(0);
  }

  oracle::Matrix heisenberg(const oracle::Matrix& a, double t) const {
    const auto& v = solver.eigenvectors();
    Eigen::VectorXcd phase(v.cols());
    for (Eigen::Index k = 0; k < phase.size(); ++k)
      phase[k] = std::exp(Complex(0, -solver.eigenvalues()[k] * t));
    const oracle::Matrix u = v * phase.asDiagonal() * v.adjoint();
    return u.adjoint() * a * u;
  }

  Complex trace(const oracle::Matrix& m) const { return ground.dot(m * ground); }
  oracle::Matrix hop(unsigned i, unsigned j) const { return c[i - 1].adjoint() * c[j - 1]; }
};

struct Setup {
  StateVector rho;
  fast::EvolutionCache cache;
};

Setup library_setup(const Model& m, MappingKind kind) {
  const auto basis = fast::majorana_basis(m.n, kind);
  fast::Hamiltonian ham(m.n);
  for (const auto& t : fast::encode(model_operator(m), basis)) ham.add(t.coeff.real(), t.string);
  fast::EvolutionCache cache(ham);
  StateVector rho(m.n, Eigen::VectorXcd(cache.eigenvectors().col(0)));
  return {rho, cache};
}

fast::EngineOptions analytic(MappingKind kind) {
  fast::EngineOptions opt;
  opt.mapping = kind;
  opt.mode = fast::EstimationMode::analytic;
  return opt;
}

void check_close(Complex got, Complex want, double tol) {
  CHECK(std::abs(got - want) <= tol);
}

}  // namespace

TEST_CASE("regime and strategy table") {
  using fast::choose_regime;
  CHECK(choose_regime(4, 0.5, MappingKind::JW, CorrelationKind::commutator).regime ==
        fast::Regime::small_n);
  CHECK(choose_regime(5, 0.5, MappingKind::JW, CorrelationKind::commutator).regime ==
        fast::Regime::large_n);
  CHECK(choose_regime(4, 0.5, MappingKind::JW, CorrelationKind::commutator).strategy == Strategy::mmc);
  CHECK(choose_regime(4, 0.5, MappingKind::BK, CorrelationKind::commutator).strategy == Strategy::mmc);
  CHECK(choose_regime(4, 0.5, MappingKind::TT, CorrelationKind::commutator).strategy == Strategy::dc);
  CHECK(choose_regime(5, 0.5, MappingKind::TT, CorrelationKind::commutator).strategy ==
        Strategy::bell_mmc);
  CHECK(choose_regime(4, 0.5, MappingKind::JW, CorrelationKind::anticommutator).strategy ==
        Strategy::nm);
  CHECK(choose_regime(4, 0.5, MappingKind::TT, CorrelationKind::anticommutator).strategy ==
        Strategy::dc);
  CHECK(choose_regime(5, 0.5, MappingKind::JW, CorrelationKind::anticommutator).strategy ==
        Strategy::chained);
  CHECK(choose_regime(5, 0.5, MappingKind::BK, CorrelationKind::anticommutator).strategy ==
        Strategy::bell_mmc);
  CHECK_THROWS_AS(choose_regime(3, 0.0, MappingKind::JW, CorrelationKind::commutator),
                  fast::DomainError);
}

TEST_CASE("majority rule") {
  const std::vector<int> bits = {0, 0, 1, 0, 1};
  const auto sel = fast::majority_select(bits);
  CHECK(sel.chosen == fast::Branch::plus);
  CHECK(sel.n_plus == 3);
  CHECK(sel.c_plus_sq_hat == doctest::Approx(0.6));
  CHECK(fast::majority_select(std::uint64_t{2}, std::uint64_t{2}).chosen == fast::Branch::plus);
  const auto minus = fast::majority_select(std::uint64_t{1}, std::uint64_t{4});
  CHECK(minus.chosen == fast::Branch::minus);
  CHECK(minus.retained() == 4);
  CHECK(minus.chosen_weight() == doctest::Approx(0.8));
  CHECK_THROWS_AS(fast::majority_select(std::uint64_t{0}, std::uint64_t{0}), fast::DomainError);
  const std::vector<int> bad = {0, 2};
  CHECK_THROWS_AS(fast::majority_select(bad), fast::DomainError);
}

TEST_CASE("plans reproduce dense commutators and anticommutators") {
  std::mt19937_64 g(11);
  for (int trial = 0; trial < 40; ++trial) {
    const unsigned q = 3;
    const std::string la = oracle::random_letters(g, q), lb = oracle::random_letters(g, q);
    const PauliString a = PauliString::parse(la), b = PauliString::parse(lb);
    const auto psi = oracle::random_state(g, q);
    fast::Hamiltonian ham(q);
    ham.add(0.8, PauliString::parse("XXI"));
    ham.add(-0.3, PauliString::parse("ZIZ"));
    ham.add(0.5, PauliString::parse("IYY"));
    const fast::EvolutionCache cache(ham);
    const double t = 0.37;

    const Eigen::MatrixXcd h = ham.dense();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    Eigen::VectorXcd ph(es.eigenvalues().size());
    for (Eigen::Index k = 0; k < ph.size(); ++k) ph[k] = std::exp(Complex(0, -es.eigenvalues()[k] * t));
    const Eigen::MatrixXcd u = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    const Eigen::MatrixXcd at = u.adjoint() * oracle::pauli(la) * u;
    const Eigen::MatrixXcd bm = oracle::pauli(lb);
    const Complex comm = psi.dot((at * bm - bm * at) * psi);
    const Complex anti = psi.dot((at * bm + bm * at) * psi);

    const StateVector rho(q, psi);
    const auto pc = fast::reformulate_commutator(a, b, t);
    CHECK(pc.prefactor == Complex(0, -1));
    check_close(fast::evaluate_exact(pc, rho, cache), comm, 1e-10);
    for (auto branch : {fast::Branch::plus, fast::Branch::minus}) {
      const auto pa = fast::reformulate_anticommutator(a, b, t, branch);
      CHECK(pa.heralded);
      check_close(fast::evaluate_exact(pa, rho, cache), anti, 1e-10);
    }
  }
}

TEST_CASE("plan weights and preconditions") {
  const auto a = PauliString::parse("XZ"), b = PauliString::parse("YY");
  const auto plus = fast::reformulate_anticommutator(a, b, 0.0, fast::Branch::plus);
  const auto minus = fast::reformulate_anticommutator(a, b, 0.0, fast::Branch::minus);
  CHECK(plus.weights == std::array<double, 3>{4.0, -1.0, -1.0});
  CHECK(minus.weights == std::array<double, 3>{-4.0, 1.0, 1.0});
  CHECK(fast::reformulate_commutator(a, b, 0.0).weights == std::array<double, 3>{2.0, -1.0, -1.0});
  CHECK_THROWS_AS(fast::reformulate_commutator(a, PauliString::parse("iXX"), 0.0), fast::DomainError);
  CHECK_THROWS_AS(fast::reformulate_commutator(a, PauliString::parse("XXX"), 0.0),
                  fast::DimensionError);
}

TEST_CASE("analytic FAST 1 matches dense commutators") {
  for (unsigned n : {2u, 3u}) {
    const Model m = random_model(n, 100 + n);
    const Reference ref(m);
    for (MappingKind kind : {MappingKind::JW, MappingKind::BK, MappingKind::TT}) {
      const Setup s = library_setup(m, kind);
      for (double t : {0.0, 0.3, 1.0}) {
        const auto mat = fast::fast1(s.rho, s.cache, n, t, analytic(kind));
        REQUIRE(mat.entries.size() == std::size_t(n * n * n * n));
        for (const auto& e : mat.entries) {
          const auto& ix = e.indices;
          const auto at = ref.heisenberg(ref.hop(ix[0], ix[1]), t);
          const auto b = ref.hop(ix[2], ix[3]);
          const Complex raw = ref.trace(at * b - b * at);
          check_close(e.raw, raw, 1e-9);
          check_close(e.value, Complex(0, -1) * raw, 1e-9);
        }
      }
    }
  }
}

TEST_CASE("analytic FAST 2 matches dense Green's function") {
  for (unsigned n : {2u, 3u, 4u}) {
    const Model m = random_model(n, 200 + n);
    const Reference ref(m);
    for (MappingKind kind : {MappingKind::JW, MappingKind::BK, MappingKind::TT}) {
      const Setup s = library_setup(m, kind);
      for (double t : {0.0, 0.3, 1.0}) {
        const auto mat = fast::fast2(s.rho, s.cache, n, t, analytic(kind));
        for (unsigned a = 1; a <= n; ++a) {
          for (unsigned b = 1; b <= n; ++b) {
            const auto at = ref.heisenberg(ref.c[a - 1], t);
            const auto bd = ref.c[b - 1].adjoint();
            const Complex anti = ref.trace(at * bd + bd * at);
            const auto& e = mat.at(a - 1, b - 1);
            CHECK(e.indices == std::vector<unsigned>{a, b});
            check_close(e.value, Complex(0, -1) * anti, 1e-9);
          }
        }
      }
    }
  }
}

TEST_CASE("equal-time anticommutators reproduce the CAR") {
  const Model m = random_model(3, 7);
  for (MappingKind kind : {MappingKind::JW, MappingKind::BK, MappingKind::TT}) {
    const Setup s = library_setup(m, kind);
    const auto mat = fast::fast2(s.rho, s.cache, 3, 0.0, analytic(kind));
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b) check_close(mat.at(a, b).raw, a == b ? 1.0 : 0.0, 1e-10);
  }
}

TEST_CASE("general correlations combine both runs") {
  const unsigned n = 3;
  const Model m = random_model(n, 303);
  const Reference ref(m);
  for (MappingKind kind : {MappingKind::JW, MappingKind::TT}) {
    const Setup s = library_setup(m, kind);
    const double t = 0.45;
    const auto mat = fast::general_correlations(s.rho, s.cache, n, t, analytic(kind));
    for (unsigned a = 1; a <= n; ++a) {
      for (unsigned b = 1; b <= n; ++b) {
        const Complex want = ref.trace(ref.heisenberg(ref.c[a - 1], t) * ref.c[b - 1].adjoint());
        check_close(mat.at(a - 1, b - 1).value, want, 1e-9);
      }
    }
  }

  fast::CorrelationEstimate comm, anti;
  comm.kind = CorrelationKind::commutator;
  anti.kind = CorrelationKind::anticommutator;
  comm.indices = anti.indices = {1, 2};
  comm.raw = Complex(0.2, 0.4);
  anti.raw = Complex(1.0, -0.2);
  comm.stderr = 0.03;
  anti.stderr = 0.04;
  const auto g = fast::general_correlation(comm, anti);
  check_close(g.value, Complex(0.6, 0.1), 1e-15);
  CHECK(g.stderr == doctest::Approx(0.025));
  anti.indices = {2, 1};
  CHECK_THROWS_AS(fast::general_correlation(comm, anti), fast::DomainError);
  anti.indices = {1, 2};
  anti.t = 0.5;
  CHECK_THROWS_AS(fast::general_correlation(comm, anti), fast::DomainError);
}

TEST_CASE("circuit counts follow the closed forms") {
  const unsigned n = 3;
  const Model m = random_model(n, 9);
  for (MappingKind kind : {MappingKind::JW, MappingKind::BK}) {
    const Setup s = library_setup(m, kind);
    auto opt = analytic(kind);
    opt.eps = 0.5;

    const auto f1 = fast::fast1(s.rho, s.cache, n, 0.2, opt);
    CHECK(f1.choice.strategy == Strategy::mmc);
    CHECK(f1.family_size == n * (2 * n - 1));
    CHECK(f1.b_components == n * (2 * n - 1));
    CHECK(f1.circuits_total == 3 * f1.b_components * f1.colors);
    CHECK(f1.fermionic_circuits == 3 * n * n * f1.colors);

    const auto f2 = fast::fast2(s.rho, s.cache, n, 0.2, opt);
    CHECK(f2.choice.strategy == Strategy::nm);
    CHECK(f2.circuits_total == 3 * (2 * n) * (2 * n));
    CHECK(f2.fermionic_circuits == 3 * n * n);

    opt.strategy = Strategy::brute_force;
    const auto bf = fast::fast1(s.rho, s.cache, n, 0.2, opt);
    CHECK(bf.choice.strategy == Strategy::brute_force);
    CHECK(bf.circuits_total == 3 * f1.b_components * f1.family_size);
    CHECK(bf.fermionic_circuits == 3 * n * n * n * n);
  }
  const Setup tt = library_setup(m, MappingKind::TT);
  auto opt = analytic(MappingKind::TT);
  opt.eps = 0.5;
  const auto dc = fast::fast1(tt.rho, tt.cache, n, 0.2, opt);
  CHECK(dc.choice.strategy == Strategy::dc);
  CHECK(dc.circuits_total == 3 * dc.b_components);
  CHECK(dc.fermionic_circuits == 3 * n * n);
}

TEST_CASE("sampled estimates agree with the dense reference") {
  const unsigned n = 2;
  const Model m = random_model(n, 21);
  const Reference ref(m);
  const double t = 0.6;
  for (MappingKind kind : {MappingKind::JW, MappingKind::BK, MappingKind::TT}) {
    const Setup s = library_setup(m, kind);
    fast::EngineOptions opt;
    opt.mapping = kind;
    opt.eps = 0.2;
    opt.seed = 5;
    int outside = 0, total = 0;
    const auto f1 = fast::fast1(s.rho, s.cache, n, t, opt);
    for (const auto& e : f1.entries) {
      const auto& ix = e.indices;
      const auto at = ref.heisenberg(ref.hop(ix[0], ix[1]), t);
      const auto b = ref.hop(ix[2], ix[3]);
      const Complex want = Complex(0, -1) * ref.trace(at * b - b * at);
      outside += std::abs(e.value - want) > 4 * e.stderr + 1e-12;
      CHECK(std::abs(e.value - want) < 0.2);
      ++total;
    }
    const auto f2 = fast::fast2(s.rho, s.cache, n, t, opt);
    for (const auto& e : f2.entries) {
      const auto at = ref.heisenberg(ref.c[e.indices[0] - 1], t);
      const auto bd = ref.c[e.indices[1] - 1].adjoint();
      const Complex want = Complex(0, -1) * ref.trace(at * bd + bd * at);
      outside += std::abs(e.value - want) > 4 * e.stderr + 1e-12;
      CHECK(std::abs(e.value - want) < 0.2);
      CHECK(e.branches.size() == 2);
      ++total;
    }
    CHECK(outside <= 1);
  }
}

TEST_CASE("two-copy strategies") {
  const unsigned n = 2;
  const Model m = random_model(n, 33);
  const Reference ref(m);
  const Setup s = library_setup(m, MappingKind::JW);
  const double t = 0.4;

  SUBCASE("analytic with a tiny threshold is exact") {
    for (Strategy st : {Strategy::bell_mmc, Strategy::chained}) {
      auto opt = analytic(MappingKind::JW);
      opt.eps = 1e-6;
      opt.strategy = st;
      const auto mat = fast::fast2(s.rho, s.cache, n, t, opt);
      CHECK(mat.choice.strategy == st);
      for (const auto& e : mat.entries) {
        const auto at = ref.heisenberg(ref.c[e.indices[0] - 1], t);
        const auto bd = ref.c[e.indices[1] - 1].adjoint();
        check_close(e.raw, ref.trace(at * bd + bd * at), 1e-9);
      }
    }
  }

  SUBCASE("sampled bell_mmc is within tolerance") {
    fast::EngineOptions opt;
    opt.eps = 0.25;
    opt.strategy = Strategy::bell_mmc;
    opt.seed = 3;
    const auto mat = fast::fast1(s.rho, s.cache, n, t, opt);
    for (const auto& e : mat.entries) {
      const auto& ix = e.indices;
      const auto at = ref.heisenberg(ref.hop(ix[0], ix[1]), t);
      const auto b = ref.hop(ix[2], ix[3]);
      CHECK(std::abs(e.raw - ref.trace(at * b - b * at)) < 0.25);
    }
  }

  SUBCASE("chained needs Majorana anticommutator targets under jw") {
    auto opt = analytic(MappingKind::JW);
    opt.strategy = Strategy::chained;
    CHECK_THROWS_AS(fast::fast1(s.rho, s.cache, n, t, opt), fast::ConfigError);
    opt.mapping = MappingKind::BK;
    const Setup bk = library_setup(m, MappingKind::BK);
    CHECK_THROWS_AS(fast::fast2(bk.rho, bk.cache, n, t, opt), fast::ConfigError);
  }
}

TEST_CASE("results do not depend on the worker count") {
  const unsigned n = 3;
  const Model m = random_model(n, 44);
  const Setup s = library_setup(m, MappingKind::JW);
  fast::EngineOptions opt;
  opt.seed = 99;
  opt.eps = 0.5;
  opt.max_workers = 1;
  const auto one = fast::fast2(s.rho, s.cache, n, 0.3, opt);
  opt.max_workers = 4;
  const auto four = fast::fast2(s.rho, s.cache, n, 0.3, opt);
  for (std::size_t k = 0; k < one.entries.size(); ++k) {
    CHECK(one.entries[k].value == four.entries[k].value);
    CHECK(one.entries[k].stderr == four.entries[k].stderr);
  }
  opt.seed = 100;
  const auto other = fast::fast2(s.rho, s.cache, n, 0.3, opt);
  CHECK(other.entries[0].value != one.entries[0].value);
}

TEST_CASE("option validation") {
  const Model m = random_model(2, 1);
  const Setup s = library_setup(m, MappingKind::JW);
  fast::EngineOptions opt;
  opt.shots.per_circuit = 9;
  CHECK_THROWS_AS(fast::fast2(s.rho, s.cache, 2, 0.1, opt), fast::ConfigError);
  opt.shots.per_circuit = 10;
  CHECK_NOTHROW(fast::fast2(s.rho, s.cache, 2, 0.1, opt));
  opt.eps = 0.0;
  CHECK_THROWS_AS(fast::fast2(s.rho, s.cache, 2, 0.1, opt), fast::ConfigError);
  CHECK_THROWS_AS(fast::fast2(s.rho, s.cache, 3, 0.1, fast::EngineOptions{}), fast::DimensionError);
  CHECK(fast::parse_strategy("Bell_MMC") == Strategy::bell_mmc);
  CHECK_THROWS_AS(fast::parse_strategy("fastest"), fast::ConfigError);
  CHECK(fast::step(0.0) == 1.0);
  CHECK(fast::step(-1e-9) == 0.0);
}
