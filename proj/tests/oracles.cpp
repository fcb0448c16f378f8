#include "oracles.hpp"

#include "usc/random.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <map>

namespace oracle {

EdgeSet brute_force_edges(const usc::CarpetSpec& spec, int n) {
  const int N = spec.N();
  std::int64_t count = 1;
  for (int i = 0; i < n; ++i) count *= N;
  std::vector<usc::Square> sq;
  sq.reserve(count);
  for (std::int64_t w = 0; w < count; ++w) sq.push_back(usc::cell_square(spec, usc::word_from_index(w, n, N)));
  EdgeSet out;
  for (std::int64_t i = 0; i < count; ++i)
    for (std::int64_t j = i + 1; j < count; ++j) {
      const auto& a = sq[i];
      const auto& b = sq[j];
      if (a.x <= b.x + b.side && b.x <= a.x + a.side && a.y <= b.y + b.side && b.y <= a.y + a.side)
        out.emplace(i, j);
    }
  return out;
}

Eigen::MatrixXd dense_laplacian(const usc::CellGraph& g) {
  std::vector<std::pair<int, int>> e;
  for (auto [a, b] : g.edges()) e.emplace_back(a, b);
  return dense_laplacian(g.size(), e);
}

Eigen::MatrixXd dense_laplacian(int n, const std::vector<std::pair<int, int>>& edges,
                                const std::vector<double>& weights) {
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t t = 0; t < edges.size(); ++t) {
    auto [a, b] = edges[t];
    const double w = weights.empty() ? 1.0 : weights[t];
    L(a, a) += w;
    L(b, b) += w;
    L(a, b) -= w;
    L(b, a) -= w;
  }
  return L;
}

Eigen::MatrixXd to_dense(const usc::SparseForm& f) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(f.dimension(), f.dimension());
  for (std::int32_t i = 0; i < f.dimension(); ++i) {
    auto c = f.row_cols(i);
    auto v = f.row_vals(i);
    for (std::size_t t = 0; t < c.size(); ++t) M(i, c[t]) += v[t];
  }
  return M;
}

Eigen::VectorXd dense_dirichlet(const Eigen::MatrixXd& L, const std::vector<int>& fixed_vertices,
                                const std::vector<double>& fixed_values) {
  const int n = static_cast<int>(L.rows());
  std::vector<int> pos(n, -1), free;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<char> is_fixed(n, 0);
  for (std::size_t i = 0; i < fixed_vertices.size(); ++i) {
    is_fixed[fixed_vertices[i]] = 1;
    x(fixed_vertices[i]) = fixed_values[i];
  }
  for (int v = 0; v < n; ++v)
    if (!is_fixed[v]) {
      pos[v] = static_cast<int>(free.size());
      free.push_back(v);
    }
  const int m = static_cast<int>(free.size());
  if (m == 0) return x;
  Eigen::MatrixXd A(m, m);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) A(i, j) = L(free[i], free[j]);
    for (int v = 0; v < n; ++v)
      if (is_fixed[v]) b(i) -= L(free[i], v) * x(v);
  }
  Eigen::VectorXd y = A.ldlt().solve(b);
  for (int i = 0; i < m; ++i) x(free[i]) = y(i);
  return x;
}

double dense_resistance(const Eigen::MatrixXd& L, const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> f;
  std::vector<double> v;
  for (int x : a) {
    f.push_back(x);
    v.push_back(1.0);
  }
  for (int x : b) {
    f.push_back(x);
    v.push_back(0.0);
  }
  Eigen::VectorXd h = dense_dirichlet(L, f, v);
  return 1.0 / h.dot(L * h);
}

double dense_gap(const Eigen::MatrixXd& L) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
  return es.eigenvalues()(1);
}

Eigen::MatrixXd dense_schur(const Eigen::MatrixXd& L, const std::vector<int>& kept) {
  const int n = static_cast<int>(L.rows());
  std::vector<char> k(n, 0);
  for (int v : kept) k[v] = 1;
  std::vector<int> rest;
  for (int v = 0; v < n; ++v)
    if (!k[v]) rest.push_back(v);
  const int a = static_cast<int>(kept.size()), c = static_cast<int>(rest.size());
  Eigen::MatrixXd Lvv(a, a), Lvc(a, c), Lcc(c, c);
  for (int i = 0; i < a; ++i) {
    for (int j = 0; j < a; ++j) Lvv(i, j) = L(kept[i], kept[j]);
    for (int j = 0; j < c; ++j) Lvc(i, j) = L(kept[i], rest[j]);
  }
  for (int i = 0; i < c; ++i)
    for (int j = 0; j < c; ++j) Lcc(i, j) = L(rest[i], rest[j]);
  if (c == 0) return Lvv;
  return Lvv - Lvc * Lcc.ldlt().solve(Lvc.transpose());
}

double dense_quadratic_sup(const Eigen::MatrixXd& L, const Eigen::VectorXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
  double s = 0.0;
  for (int i = 1; i < L.rows(); ++i) {
    const double c = es.eigenvectors().col(i).dot(a);
    s += c * c / es.eigenvalues()(i);
  }
  return s;
}

std::vector<std::pair<int, int>> random_connected_graph(int n, double p, std::uint64_t seed) {
  usc::CounterRng rng(seed, 17);
  std::set<std::pair<int, int>> e;
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
  for (int i = 0; i + 1 < n; ++i) e.emplace(std::min(perm[i], perm[i + 1]), std::max(perm[i], perm[i + 1]));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < p) e.emplace(i, j);
  return {e.begin(), e.end()};
}

usc::SparseForm sparse_laplacian(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<std::pair<int, double>>> rows(n);
  for (auto [a, b] : edges) {
    rows[a].emplace_back(b, -1.0);
    rows[b].emplace_back(a, -1.0);
    rows[a].emplace_back(a, 1.0);
    rows[b].emplace_back(b, 1.0);
  }
  std::vector<std::int64_t> ptr{0};
  std::vector<std::int32_t> cols;
  std::vector<double> vals;
  for (int i = 0; i < n; ++i) {
    std::map<int, double> acc;
    for (auto [j, v] : rows[i]) acc[j] += v;
    if (!acc.count(i)) acc[i] = 0.0;
    for (auto [j, v] : acc) {
      cols.push_back(j);
      vals.push_back(v);
    }
    ptr.push_back(static_cast<std::int64_t>(cols.size()));
  }
  return usc::SparseForm(n, ptr, cols, vals);
}

}  // namespace oracle
