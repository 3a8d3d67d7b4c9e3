#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tshopfield/certificates.hpp"
#include "tshopfield/network.hpp"
#include "tshopfield/timescale.hpp"

using namespace tsh;

namespace {

HopfieldSystem two_node_system(double b = 0.2, double c = 0.1) {
  Graph g(2);
  g.add_edge(0, 1);
  std::vector<NodeParams> params(2);
  return build_system(g, params, PayoffSpec{b, c});
}

Eigen::MatrixXd random_z_matrix(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> diag(0.0, 2.5);
  std::uniform_real_distribution<double> off(-0.6, 0.0);
  Eigen::MatrixXd Q(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) Q(i, j) = i == j ? diag(rng) : off(rng);
  }
  return Q;
}

}  // namespace

TEST_CASE("spectral norm") {
  Eigen::MatrixXd D = Eigen::Vector2d(3.0, -5.0).asDiagonal();
  CHECK_THAT(spectral_norm(D), Catch::Matchers::WithinAbs(5.0, 1e-10));

  Eigen::MatrixXd N(2, 2);
  N << 0, 1, 0, 0;
  CHECK_THAT(spectral_norm(N), Catch::Matchers::WithinAbs(1.0, 1e-10));

  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd A(8, 8);
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 8; ++j) A(i, j) = gauss(rng);
    }
    CHECK_THAT(spectral_norm(A),
               Catch::Matchers::WithinRel(oracles::power_iteration_norm(A), 1e-8));
  }
}

TEST_CASE("gershgorin discs") {
  Eigen::MatrixXd D = Eigen::Vector2d(1.0, 2.0).asDiagonal();
  auto discs = gershgorin_discs(D);
  CHECK(discs[0].center == 1.0);
  CHECK(discs[0].radius == 0.0);
  CHECK(discs[1].center == 2.0);

  Eigen::MatrixXd S(2, 2);
  S << 2, -1, -1, 2;
  auto ds = gershgorin_discs(S);
  CHECK(ds[0].center == 2.0);
  CHECK(ds[0].radius == 1.0);

  auto sys = two_node_system(2.0, 1.0);
  auto sys_discs = gershgorin_discs(sys.A);
  CHECK(sys_discs[0].center == -1.0);  // -k c / C
  CHECK(sys_discs[0].radius == 2.0);   // k b / C
}

TEST_CASE("gershgorin soundness: eigenvalues lie in the disc union") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + trial % 6;
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) A(i, j) = gauss(rng);
    }
    auto discs = gershgorin_discs(A);
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    for (int k = 0; k < n; ++k) {
      const std::complex<double> nu = es.eigenvalues()[k];
      bool inside = false;
      for (const auto& d : discs) {
        if (std::abs(nu - std::complex<double>(d.center, 0.0)) <=
            d.radius + 1e-10) {
          inside = true;
        }
      }
      CHECK(inside);
    }
  }
}

TEST_CASE("M-matrix verdicts") {
  auto id = is_m_matrix(Eigen::MatrixXd::Identity(3, 3));
  CHECK(id.is_m_matrix);
  CHECK(id.is_z_pattern);
  CHECK(id.gershgorin_sufficient);

  Eigen::MatrixXd ok(2, 2);
  ok << 2, -1, -1, 2;  // eigenvalues 1, 3
  auto v = is_m_matrix(ok);
  CHECK(v.is_m_matrix);

  Eigen::MatrixXd bad(2, 2);
  bad << 1, -3, -3, 1;  // eigenvalues -2, 4
  auto w = is_m_matrix(bad);
  CHECK_FALSE(w.is_m_matrix);
  CHECK(w.is_z_pattern);
  CHECK_FALSE(w.gershgorin_sufficient);

  Eigen::MatrixXd notz(2, 2);
  notz << 1, 3, 0, 1;
  CHECK_FALSE(is_m_matrix(notz).is_m_matrix);
  CHECK_FALSE(is_m_matrix(notz).is_z_pattern);
}

TEST_CASE("M-matrix verdict agrees with the principal-minor oracle") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 7;
    Eigen::MatrixXd Q = random_z_matrix(rng, n);
    auto v = is_m_matrix(Q);
    CHECK(v.is_m_matrix == oracles::m_matrix_bruteforce(Q));
    // Invariants: M-matrix implies Z-pattern; Gershgorin sufficiency
    // implies the exact verdict.
    if (v.is_m_matrix) CHECK(v.is_z_pattern);
    if (v.gershgorin_sufficient) CHECK(v.is_m_matrix);
  }
}

TEST_CASE("regressivity lemma check over distinct graininess") {
  auto sys = two_node_system();

  auto interval = TimeScale::normalize({{0.0, 5.0}});
  CHECK(check_regressivity(sys, interval, 0.0, 5.0).pass);

  // mu = 1 with B = diag(2): (1 - 2) on the diagonal fails.
  Graph g1(1);
  std::vector<NodeParams> p1(1);
  p1[0].R = 0.5;  // b = 2
  auto sys1 = build_system(g1, p1, PayoffSpec{0.2, 0.1});
  auto grid = TimeScale::normalize({{0, 0}, {1, 1}, {2, 2}});
  CHECK_FALSE(check_regressivity(sys1, grid, 0.0, 2.0).pass);

  // Small graininess, small payoffs: passes.
  auto fine = TimeScale::normalize({{0.0, 1.0}})
                  .with_periodic_tail({{1.1, 2.1}}, 1.1);
  auto v = check_regressivity(sys, fine, 0.0, 5.0);
  CHECK(v.pass);
}

TEST_CASE("equilibrium norm bound r0") {
  Graph g1(1);
  std::vector<NodeParams> p0(1);
  auto zero_sys = build_system(g1, p0, PayoffSpec{0.2, 0.1});
  CHECK(equilibrium_bound_r0(zero_sys) == 0.0);  // A = 0, J = 0

  // n = 1: b_1 = 1, M_1 = 1, a_11 = -0.5, J_1 = 1 -> r0 = 1.5.
  HopfieldSystem manual{(Eigen::MatrixXd(1, 1) << -0.5).finished(),
                        Eigen::VectorXd::Ones(1),
                        Eigen::VectorXd::Ones(1),
                        ActivationFamily(ActivationKind::ScaledTanh, {1.0},
                                         {1.0}, {0.0})};
  CHECK_THAT(equilibrium_bound_r0(manual),
             Catch::Matchers::WithinAbs(1.5, 1e-14));

  // Cross-check a built 2-node system against a direct re-evaluation.
  auto sys = two_node_system(0.4, 0.3);
  double acc = 0.0;
  for (int i = 0; i < 2; ++i) {
    double row = std::abs(sys.J[i]);
    for (int j = 0; j < 2; ++j) row += 1.0 * std::abs(sys.A(i, j));
    acc += (row / sys.B_diag[i]) * (row / sys.B_diag[i]);
  }
  CHECK_THAT(equilibrium_bound_r0(sys),
             Catch::Matchers::WithinRel(std::sqrt(acc), 1e-14));
}

TEST_CASE("uniqueness certificate") {
  Graph g2(2);
  std::vector<NodeParams> p2(2);
  auto decoupled = build_system(g2, p2, PayoffSpec{0.2, 0.1});
  CHECK(check_uniqueness(decoupled).is_m_matrix);  // A = 0

  auto small = two_node_system(0.2, 0.1);  // k = 1 < 1/(1 * 0.3)
  CHECK(check_uniqueness(small).is_m_matrix);

  auto large = two_node_system(5.0, 0.5);  // off-diagonal dominates
  CHECK_FALSE(check_uniqueness(large).is_m_matrix);
}

TEST_CASE("degree condition") {
  PayoffSpec p{2.0, 1.0};  // b + c = 3
  Graph lone(1);
  std::vector<NodeParams> lp(1);
  auto lv = check_degree_condition(lone, lp, p);
  CHECK(lv.all_pass);  // k = 0 always passes

  // k = 2, lambda = 1, R = 0.1 -> bound 10/3 > 2.
  Graph tri(3);
  tri.add_edge(0, 1);
  tri.add_edge(1, 2);
  tri.add_edge(0, 2);
  std::vector<NodeParams> tp(3);
  for (auto& np : tp) np.R = 0.1;
  auto tv = check_degree_condition(tri, tp, p);
  CHECK(tv.all_pass);
  CHECK_THAT(tv.per_node[0].rhs, Catch::Matchers::WithinRel(10.0 / 3.0, 1e-14));

  // k = 4, lambda = 1, R = 1, b + c = 0.5 -> bound 2 < 4.
  Graph k5(5);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = i + 1; j < 5; ++j) k5.add_edge(i, j);
  }
  std::vector<NodeParams> kp(5);
  auto kv = check_degree_condition(k5, kp, PayoffSpec{0.3, 0.2});
  CHECK_FALSE(kv.all_pass);
  CHECK(kv.per_node[0].rhs == 2.0);
}

TEST_CASE("rhs_mu_bound values, limit and monotonicity") {
  // b_max = b_min = L = 1, mu* = 1: -2 + sqrt(5).
  CHECK_THAT(rhs_mu_bound(1.0, 1.0, 1.0, 1.0),
             Catch::Matchers::WithinRel(std::sqrt(5.0) - 2.0, 1e-13));

  // Continuous-time limit b_min / L, against the series expansion
  // rhs(mu) = b_min/L - mu (b_max + b_min)^2 / (2 L) + O(mu^2).
  const double bmax = 1.3, bmin = 0.7, L = 1.1;
  CHECK(rhs_mu_bound(bmax, bmin, L, 0.0) == bmin / L);
  for (double mu : {1e-2, 1e-4, 1e-6}) {
    const double series = bmin / L - mu * (bmax + bmin) * (bmax + bmin) / (2.0 * L);
    CHECK_THAT(rhs_mu_bound(bmax, bmin, L, mu),
               Catch::Matchers::WithinAbs(series, 10.0 * mu * mu));
  }

  // Strictly decreasing in mu*.
  double prev = rhs_mu_bound(bmax, bmin, L, 0.0);
  for (double mu = 0.05; mu < 40.0; mu *= 1.7) {
    const double cur = rhs_mu_bound(bmax, bmin, L, mu);
    CHECK(cur < prev);
    prev = cur;
  }
  // Huge mu*: condition unsatisfiable (negative rhs).
  CHECK(rhs_mu_bound(1.0, 1.0, 1.0, 100.0) < 0.0);
}

TEST_CASE("size-dependent and size-independent conditions") {
  PayoffSpec p{0.2, 0.1};

  Graph empty(3);
  std::vector<NodeParams> ep(3);
  auto esys = build_system(empty, ep, p);
  auto ev = check_size_dependent(esys, empty, ep, p, 0.4);
  CHECK(ev.condition.pass);  // lhs = 0
  CHECK(ev.condition.lhs == 0.0);
  CHECK(check_size_independent(esys, empty, ep, p, 0.4).condition.pass);

  // Single isolated node, b_max = b_min = L = 1, mu* = 1: slack = sqrt(5) - 2.
  Graph lone(1);
  std::vector<NodeParams> lp(1);
  auto lsys = build_system(lone, lp, p);
  auto lv = check_size_dependent(lsys, lone, lp, p, 1.0);
  CHECK(lv.condition.pass);
  CHECK_THAT(lv.condition.slack,
             Catch::Matchers::WithinRel(std::sqrt(5.0) - 2.0, 1e-12));

  // Dense complete graph with large payoffs: size-dependent fails.
  const std::size_t n = 10;
  Graph dense(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) dense.add_edge(i, j);
  }
  std::vector<NodeParams> dp(n);
  PayoffSpec big{2.0, 1.0};
  auto dsys = build_system(dense, dp, big);
  CHECK_FALSE(check_size_dependent(dsys, dense, dp, big, 0.5).condition.pass);

  // Ring: size-independent lhs does not grow with n.
  PayoffSpec mild{0.1, 0.05};
  for (std::size_t m : {8ul, 64ul}) {
    Graph ring(m);
    for (std::size_t i = 0; i < m; ++i) ring.add_edge(i, (i + 1) % m);
    std::vector<NodeParams> rp(m);
    auto rsys = build_system(ring, rp, mild);
    auto rv = check_size_independent(rsys, ring, rp, mild, 0.4);
    CHECK_THAT(rv.condition.lhs, Catch::Matchers::WithinRel(0.3, 1e-12));
    CHECK(rv.condition.pass);
  }

  // Star: K* = n - 1, size-independent fails for large payoffs.
  Graph star(12);
  for (std::size_t i = 1; i < 12; ++i) star.add_edge(0, i);
  std::vector<NodeParams> sp(12);
  auto ssys = build_system(star, sp, big);
  CHECK_FALSE(check_size_independent(ssys, star, sp, big, 0.5).condition.pass);
}

TEST_CASE("exponential rate certificate") {
  PayoffSpec p{0.2, 0.1};
  Graph empty(2);
  std::vector<NodeParams> ep(2);
  auto esys = build_system(empty, ep, p);
  auto ts = TimeScale::normalize({{0, 0}, {0.5, 0.5}, {1.0, 1.0}, {1.5, 1.5}});
  auto v = check_exponential(esys, empty, ep, p, ts, 0.0, 1.5);
  CHECK(v.pass);  // A = 0, beta = b_min = 1, mu* b_min = 0.5 < 1
  CHECK(v.beta == 1.0);

  // mu = 2 with b_min = 1: 1 - 2 < 0, regressivity fails.
  auto coarse = TimeScale::normalize({{0, 0}, {2, 2}, {4, 4}});
  auto w = check_exponential(esys, empty, ep, p, coarse, 0.0, 4.0);
  CHECK_FALSE(w.pass);
  CHECK_FALSE(w.regressive);
}

TEST_CASE("norm chain and closed-form infinity norm on generated systems") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> cd(0.5, 2.0);
  std::uniform_real_distribution<double> pd(0.05, 1.0);
  std::bernoulli_distribution coin(0.35);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 8;
    Graph g(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (coin(rng)) g.add_edge(i, j);
      }
    }
    std::vector<NodeParams> params(n);
    for (auto& np : params) np.C = cd(rng);
    const double c = pd(rng);
    PayoffSpec p{c + pd(rng), c};
    auto sys = build_system(g, params, p);

    const double n2 = spectral_norm(sys.A);
    const double n1 = sys.A.cwiseAbs().colwise().sum().maxCoeff();
    const double ninf = sys.A.cwiseAbs().rowwise().sum().maxCoeff();
    CHECK(n2 <= std::sqrt(static_cast<double>(n)) * ninf + 1e-12);
    CHECK(n2 * n2 <= n1 * ninf + 1e-12);

    double want = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      want = std::max(want, (p.b + p.c) * g.degree(i) / params[i].C);
    }
    if (want > 0.0) {
      CHECK_THAT(ninf, Catch::Matchers::WithinRel(want, 1e-12));
    } else {
      CHECK(ninf == 0.0);
    }
  }
}

TEST_CASE("aggregate report and lambda-convention flag") {
  PayoffSpec p{0.02, 0.01};
  Graph ring(6);
  for (std::size_t i = 0; i < 6; ++i) ring.add_edge(i, (i + 1) % 6);
  std::vector<NodeParams> params(6);
  auto sys = build_system(ring, params, p);
  auto ts = TimeScale::normalize(
      {{0.0, 1.0}, {1.5, 1.5}, {2.0, 2.0}, {2.5, 2.5}, {3.0, 5.0}});
  auto rep = evaluate_certificates(ring, params, p, sys, ts, 0.0, 5.0, 0.5);
  CHECK(rep.regressivity.pass);
  CHECK(rep.uniqueness.is_m_matrix);
  CHECK(rep.degree_condition.all_pass);
  CHECK(rep.size_dependent.condition.pass);
  CHECK(rep.size_independent.condition.pass);
  CHECK(rep.exponential.pass);
  CHECK(rep.all_pass());
  // With lambda_i = 1 both conventions coincide; no disagreement flagged.
  CHECK_FALSE(rep.lambda_convention_disagreement);

  // Degree-condition passing implies the proof-algebra inequality.
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(params[i].lambda / (params[i].R * params[i].C) -
              ring.degree(i) * (p.c + p.b) / params[i].C >
          0.0);
  }

  // mu* below the observed graininess supremum is rejected.
  CHECK_THROWS_AS(
      evaluate_certificates(ring, params, p, sys, ts, 0.0, 5.0, 0.1),
      std::invalid_argument);
}
