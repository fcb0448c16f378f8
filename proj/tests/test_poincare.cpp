#include <doctest.h>

#include "oracles.hpp"
#include "usc/poincare.hpp"

#include <cmath>
#include <numeric>
#include <queue>

using namespace usc;

namespace {

// Dense Laplacian on all level-n words from exact pairwise intersection.
Eigen::MatrixXd brute_laplacian(const CarpetSpec& spec, int n) {
  const int size = static_cast<int>(checked_power(spec.N(), n));
  std::vector<std::pair<int, int>> e;
  for (auto [a, b] : oracle::brute_force_edges(spec, n)) e.emplace_back(static_cast<int>(a), static_cast<int>(b));
  return oracle::dense_laplacian(size, e);
}

std::vector<int> bfs_ball(const Eigen::MatrixXd& L, int v, int radius) {
  std::vector<int> dist(L.rows(), -1);
  std::queue<int> q;
  dist[v] = 0;
  q.push(v);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    if (dist[u] == radius) continue;
    for (int w = 0; w < L.rows(); ++w)
      if (w != u && L(u, w) != 0.0 && dist[w] < 0) {
        dist[w] = dist[u] + 1;
        q.push(w);
      }
  }
  std::vector<int> out;
  for (int u = 0; u < L.rows(); ++u)
    if (dist[u] >= 0) out.push_back(u);
  return out;
}

// R(w . W_m, far . W_m) on the dense level |w|+m Laplacian; inf if far is empty.
double dense_R(const CarpetSpec& spec, const Eigen::MatrixXd& coarse, const Eigen::MatrixXd& fine, int v, int m) {
  const auto block = static_cast<int>(checked_power(spec.N(), m));
  auto near = bfs_ball(coarse, v, 2);
  std::vector<char> in(coarse.rows(), 0);
  for (int u : near) in[u] = 1;
  std::vector<int> a, b;
  for (int u = 0; u < fine.rows(); ++u) {
    if (u / block == v) a.push_back(u);
    else if (!in[u / block]) b.push_back(u);
  }
  if (b.empty()) return std::numeric_limits<double>::infinity();
  return oracle::dense_resistance(fine, a, b);
}

}  // namespace

TEST_SUITE("poincare") {

TEST_CASE("lambda_n is the reciprocal dense spectral gap") {
  auto sc = standard_carpet();
  for (int n : {1, 2}) CHECK(lambda_n(sc, n) == doctest::Approx(1.0 / oracle::dense_gap(brute_laplacian(sc, n))).epsilon(1e-8));
}

TEST_CASE("cross resistance: series-parallel value at level 1 and dense at level 2") {
  auto sc = standard_carpet();
  auto c1 = cross_resistance(sc, 1);
  CHECK(c1.horizontal == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(c1.vertical == doctest::Approx(0.5).epsilon(1e-9));
  auto L2 = brute_laplacian(sc, 2);
  auto g2 = build_graph(sc, 2);
  std::vector<int> left, right;
  for (auto v : g2->side_vertices(Side::left)) left.push_back(static_cast<int>(g2->word(v)));
  for (auto v : g2->side_vertices(Side::right)) right.push_back(static_cast<int>(g2->word(v)));
  CHECK(cross_resistance(sc, 2).value() == doctest::Approx(oracle::dense_resistance(L2, left, right)).epsilon(1e-9));
}

TEST_CASE("sigma pair equals the dense pseudo-inverse quadratic form") {
  auto sc = standard_carpet();
  for (const auto& [w, other] : {std::pair{Word{1}, Word{2}}, std::pair{Word{2}, Word{3}}, std::pair{Word{1, 3}, Word{2, 1}}}) {
    auto p = pair_problem(sc, w, other, 2);
    auto D = oracle::dense_laplacian(*p.graph);
    Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(p.functional.data(), p.functional.size());
    CHECK(sigma_pair(p) == doctest::Approx(p.weight * oracle::dense_quadratic_sup(D, a)).epsilon(1e-9));
  }
}

TEST_CASE("sigma certificate: random functions never beat the computed sup") {
  auto sc = standard_carpet();
  auto p = pair_problem(sc, Word{1}, Word{2}, 2);
  auto cert = sigma_certificate(p, 1000, 7);
  CHECK(cert.trials == 1000);
  CHECK(cert.max_ratio <= 1.0 + 1e-10);
  CHECK(cert.max_ratio > 0.5);
}

TEST_CASE("sigma_estimate at m = 1 equals the max over every adjacent pair") {
  auto sc = standard_carpet();
  auto est = sigma_estimate(sc, 1);
  double best = 0.0;
  for (int lw : {1, 2}) {
    for (auto [a, b] : oracle::brute_force_edges(sc, lw)) {
      auto p = pair_problem(sc, word_from_index(a, lw, sc.N()), word_from_index(b, lw, sc.N()), 1);
      auto D = oracle::dense_laplacian(*p.graph);
      Eigen::VectorXd f = Eigen::Map<const Eigen::VectorXd>(p.functional.data(), p.functional.size());
      best = std::max(best, p.weight * oracle::dense_quadratic_sup(D, f));
    }
  }
  CHECK(est.value == doctest::Approx(best).epsilon(1e-8));
  // an edge contact and a point contact
  CHECK(est.classes.size() == 2);
}

TEST_CASE("R_hat matches a dense solve with an independent BFS neighbourhood") {
  auto sc = standard_carpet();
  auto c2 = brute_laplacian(sc, 2);
  auto f3 = brute_laplacian(sc, 3);
  for (const Word& w : {Word{1, 1}, Word{1, 5}, Word{4, 6}, Word{2, 7}}) {
    auto v = static_cast<int>(word_index(w, sc.N()));
    CHECK(R_hat(sc, w, 1) == doctest::Approx(dense_R(sc, c2, f3, v, 1)).epsilon(1e-8));
  }
}

TEST_CASE("sampled_R_m orbit reduction loses nothing") {
  auto sc = standard_carpet();
  const int levels[] = {1, 2};
  auto s = sampled_R_m(sc, 1, levels);
  double best = std::numeric_limits<double>::infinity();
  for (int lw : levels) {
    auto c = brute_laplacian(sc, lw), f = brute_laplacian(sc, lw + 1);
    for (int v = 0; v < c.rows(); ++v) best = std::min(best, dense_R(sc, c, f, v, 1));
  }
  CHECK(s.value == doctest::Approx(best).epsilon(1e-8));
  CHECK(s.evaluated < 8 + 64);
}

TEST_CASE("renormalization estimators follow from the level constants") {
  auto sc = standard_carpet();
  auto est = renorm_factor(sc, 2);
  REQUIRE(est.levels.size() == 3);
  const auto& l1 = est.levels[0];
  CHECK(l1.r_lambda == doctest::Approx(8.0 * l1.lambda / est.levels[1].lambda));
  CHECK(l1.r_cross == doctest::Approx(l1.cross / est.levels[1].cross));
  CHECK(est.r_hat == doctest::Approx(std::sqrt(est.r_lambda * est.r_cross)));
  CHECK(est.theta == doctest::Approx(-std::log(est.r_hat) / std::log(3.0)));
  CHECK(est.sigma == doctest::Approx(est.theta / 2 + 0.5));
  CHECK(est.d_H == doctest::Approx(std::log(8.0) / std::log(3.0)));
  CHECK(est.d_W == doctest::Approx(est.theta + est.d_H));
  CHECK(est.valid == (est.r_hat >= 2.0 / 3 && est.r_hat <= 8.0 / 9));
}

TEST_CASE("partition of unity sums to one with exact support") {
  auto sc = standard_carpet();
  for (auto [n, m] : {std::pair{1, 1}, std::pair{1, 2}, std::pair{2, 1}}) {
    auto pu = partition_of_unity(sc, n, m);
    CHECK(pu.sum_deviation <= 1e-9);
    CHECK(pu.support_exact);
    CHECK(pu.min_value >= -1e-12);
    CHECK(pu.min_phi_sum >= 1.0 - 1e-12);
    // energies against a dense quadratic form
    auto D = oracle::dense_laplacian(*pu.graph);
    for (std::size_t w = 0; w < pu.psi.size(); w += 3) {
      Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(pu.psi[w].values().data(), pu.psi[w].values().size());
      CHECK(pu.energies[w] == doctest::Approx(x.dot(D * x)).epsilon(1e-9));
    }
  }
}

TEST_CASE("smoothing extremals reach the dense per-cell supremum") {
  auto sc = standard_carpet();
  for (int n : {1, 2}) {
    auto rep = smoothing_bound_check(sc, n, 200, 3);
    auto D = brute_laplacian(sc, n);
    const int size = static_cast<int>(D.rows());
    double best = 0.0;
    for (int w = 0; w < size; ++w) {
      Eigen::VectorXd a = Eigen::VectorXd::Constant(size, -1.0 / size);
      a(w) += 1.0;
      best = std::max(best, oracle::dense_quadratic_sup(D, a));
    }
    const double expected = best * size / rep.lambda;
    CHECK(rep.extremal_max == doctest::Approx(expected).epsilon(1e-7));
    CHECK(rep.random_max <= expected * (1 + 1e-9));
    CHECK(rep.max_ratio == doctest::Approx(std::max(rep.random_max, rep.extremal_max)));
  }
}

TEST_CASE("smoothing ratio of a constant-plus-spike function") {
  auto sc = standard_carpet();
  auto g = build_graph(sc, 1);
  std::vector<double> v(8, 0.0);
  v[0] = 1.0;  // corner cell, degree 2
  CellFunction f(g, v);
  const double lambda = 2.0;
  // |1 - 1/8|^2 / (8^-1 * 2 * 2)
  CHECK(smoothing_ratio(f, lambda) == doctest::Approx((49.0 / 64) / 0.5));
}

TEST_CASE("scaling rows are built from the same constants") {
  auto sc = standard_carpet();
  const int ns[] = {1}, ms[] = {1};
  auto chk = scaling_inequalities(sc, ns, ms);
  REQUIRE(chk.rows.size() == 1);
  const double l1 = lambda_n(sc, 1), l2 = lambda_n(sc, 2);
  const double r1 = sampled_R_m(sc, 1).value, s1 = sigma_estimate(sc, 1).value;
  CHECK(chk.rows[0].left == doctest::Approx(l1 * 8 * r1 / l2).epsilon(1e-7));
  CHECK(chk.rows[0].right == doctest::Approx(l2 / (l1 * s1)).epsilon(1e-7));
  CHECK(chk.C_left == doctest::Approx(chk.rows[0].left));
}

}  // TEST_SUITE
