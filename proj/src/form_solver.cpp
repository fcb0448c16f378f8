#include "usc/form_solver.hpp"

#include "usc/errors.hpp"
#include "usc/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace usc {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// Removes the mean on each component.
struct Projector {
  const std::vector<std::int32_t>* comp = nullptr;
  std::int32_t ncomp = 0;
  mutable std::vector<double> sum;
  std::vector<double> count;

  Projector() = default;
  Projector(const std::vector<std::int32_t>& c, std::int32_t n) : comp(&c), ncomp(n), sum(n), count(n, 0.0) {
    for (auto i : c) count[i] += 1.0;
  }
  void operator()(std::span<double> x) const {
    if (!comp) return;
    if (ncomp == 1) {
      double s = 0.0;
      for (double v : x) s += v;
      s /= count[0];
      for (double& v : x) v -= s;
      return;
    }
    std::fill(sum.begin(), sum.end(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) sum[(*comp)[i]] += x[i];
    for (std::int32_t c = 0; c < ncomp; ++c) sum[c] /= count[c];
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= sum[(*comp)[i]];
  }
};

// Jacobi-preconditioned CG from x = 0. With a projector the iteration
// runs in the mean-zero subspace.
SolveReport pcg(const SparseForm& A, std::span<const double> b, std::span<double> x, double tol,
                double max_mult, const Projector* proj) {
  const std::size_t n = b.size();
  SolveReport rep;
  std::fill(x.begin(), x.end(), 0.0);
  std::vector<double> r(b.begin(), b.end()), z(n), p(n), q(n), inv(n);
  for (std::size_t i = 0; i < n; ++i) inv[i] = 1.0 / A.diagonal(static_cast<std::int32_t>(i));
  if (proj) (*proj)(r);
  const double bnorm = norm(r);
  if (bnorm == 0.0) return rep;
  auto precond = [&] {
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] * inv[i];
    if (proj) (*proj)(z);
    return dot(r, z);
  };
  double rz = precond();
  p = z;
  const long cap = std::max<long>(10, static_cast<long>(max_mult * static_cast<double>(n)));
  const double target = tol * bnorm;
  double rnorm = bnorm;
  for (long it = 1; it <= cap; ++it) {
    A.multiply(p, q);
    const double pq = dot(p, q);
    if (pq <= 0.0) break;
    const double alpha = rz / pq;
    double rr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
      rr += r[i] * r[i];
    }
    rnorm = std::sqrt(rr);
    rep.iterations = static_cast<int>(it);
    if (rnorm <= target) {
      // the projected residual is what matters for singular systems
      if (!proj) break;
      (*proj)(r);
      rnorm = norm(r);
      if (rnorm <= target) break;
    }
    const double rz_new = precond();
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  if (proj) (*proj)(x);
  rep.relative_residual = rnorm / bnorm;
  rep.converged = rnorm <= target;
  return rep;
}

}  // namespace

SparseForm::SparseForm(std::int32_t dim, std::vector<std::int64_t> row_ptr, std::vector<std::int32_t> cols,
                       std::vector<double> vals)
    : dim_(dim), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), vals_(std::move(vals)), diag_(dim, 0.0) {
  if (static_cast<std::int32_t>(row_ptr_.size()) != dim_ + 1 || cols_.size() != vals_.size())
    throw std::invalid_argument("inconsistent CSR arrays");
  // union-find over off-diagonal entries
  std::vector<std::int32_t> parent(dim_);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::int32_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (std::int32_t i = 0; i < dim_; ++i)
    for (auto k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const auto j = cols_[k];
      if (j == i) {
        diag_[i] += vals_[k];
      } else if (vals_[k] != 0.0) {
        auto a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  comp_.resize(dim_);
  std::vector<std::int32_t> label(dim_, -1);
  for (std::int32_t i = 0; i < dim_; ++i) {
    auto r = find(i);
    if (label[r] < 0) label[r] = ncomp_++;
    comp_[i] = label[r];
  }
}

double SparseForm::entry(std::int32_t i, std::int32_t j) const {
  auto c = row_cols(i);
  auto it = std::lower_bound(c.begin(), c.end(), j);
  if (it != c.end() && *it == j) return vals_[row_ptr_[i] + (it - c.begin())];
  return 0.0;
}

void SparseForm::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::int32_t i = 0; i < dim_; ++i) {
    double s = 0.0;
    for (auto k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += vals_[k] * x[cols_[k]];
    y[i] = s;
  }
}

double SparseForm::quadratic(std::span<const double> f) const {
  double s = 0.0;
  for (std::int32_t i = 0; i < dim_; ++i)
    for (auto k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const auto j = cols_[k];
      if (j > i) {
        const double d = f[i] - f[j];
        s -= vals_[k] * d * d;
      }
    }
  return s;
}

SparseForm laplacian(const CellGraph& g) {
  const auto n = g.size();
  std::vector<std::int64_t> ptr(n + 1, 0);
  std::vector<std::int32_t> cols;
  std::vector<double> vals;
  cols.reserve(static_cast<std::size_t>(n) + 2 * g.edges().size());
  vals.reserve(cols.capacity());
  for (std::int32_t v = 0; v < n; ++v) {
    bool placed = false;
    for (auto u : g.neighbors(v)) {
      if (!placed && u > v) {
        cols.push_back(v);
        vals.push_back(g.degree(v));
        placed = true;
      }
      cols.push_back(u);
      vals.push_back(-1.0);
    }
    if (!placed) {
      cols.push_back(v);
      vals.push_back(g.degree(v));
    }
    ptr[v + 1] = static_cast<std::int64_t>(cols.size());
  }
  return SparseForm(n, std::move(ptr), std::move(cols), std::move(vals));
}

DirichletResult solve_dirichlet(const SparseForm& L, std::span<const DirichletConstraint> constraints,
                                const SolverOptions& opt) {
  const auto n = L.dimension();
  if (constraints.empty()) throw std::invalid_argument("no Dirichlet constraints");
  std::vector<double> val(n, 0.0);
  std::vector<char> fixed(n, 0);
  bool any = false;
  for (const auto& c : constraints)
    for (auto v : c.vertices) {
      if (v < 0 || v >= n) throw std::invalid_argument("constraint vertex out of range");
      if (fixed[v]) throw std::invalid_argument("constraint sets overlap at vertex " + std::to_string(v));
      fixed[v] = 1;
      val[v] = c.value;
      any = true;
    }
  if (!any) throw std::invalid_argument("empty constraint sets");

  std::vector<std::int32_t> local(n, -1), free;
  for (std::int32_t v = 0; v < n; ++v)
    if (!fixed[v]) {
      local[v] = static_cast<std::int32_t>(free.size());
      free.push_back(v);
    }
  DirichletResult res;
  res.values = val;
  if (free.empty()) return res;

  // free components that never see a constraint are singular blocks
  const auto m = static_cast<std::int32_t>(free.size());
  std::vector<std::int32_t> comp(m, -1);
  std::vector<char> anchored;
  std::int32_t ncomp = 0;
  for (std::int32_t s = 0; s < m; ++s) {
    if (comp[s] >= 0) continue;
    anchored.push_back(0);
    std::vector<std::int32_t> stack{s};
    comp[s] = ncomp;
    while (!stack.empty()) {
      auto a = stack.back();
      stack.pop_back();
      auto cols = L.row_cols(free[a]);
      auto vals = L.row_vals(free[a]);
      for (std::size_t t = 0; t < cols.size(); ++t) {
        const auto u = cols[t];
        if (u == free[a] || vals[t] == 0.0) continue;
        if (fixed[u]) {
          anchored[ncomp] = 1;
        } else if (comp[local[u]] < 0) {
          comp[local[u]] = ncomp;
          stack.push_back(local[u]);
        }
      }
    }
    ++ncomp;
  }
  std::vector<std::int32_t> keep_idx(m, -1), active;
  for (std::int32_t a = 0; a < m; ++a)
    if (anchored[comp[a]]) {
      keep_idx[a] = static_cast<std::int32_t>(active.size());
      active.push_back(free[a]);
    }
  for (std::int32_t c = 0; c < ncomp; ++c)
    if (!anchored[c]) ++res.report.untouched_components;
  if (active.empty()) return res;

  const auto na = static_cast<std::int32_t>(active.size());
  std::vector<std::int64_t> ptr(na + 1, 0);
  std::vector<std::int32_t> cols;
  std::vector<double> vals;
  std::vector<double> rhs(na, 0.0);
  for (std::int32_t a = 0; a < na; ++a) {
    const auto v = active[a];
    auto rc = L.row_cols(v);
    auto rv = L.row_vals(v);
    for (std::size_t t = 0; t < rc.size(); ++t) {
      const auto u = rc[t];
      if (fixed[u]) {
        rhs[a] -= rv[t] * val[u];
      } else {
        cols.push_back(keep_idx[local[u]]);
        vals.push_back(rv[t]);
      }
    }
    ptr[a + 1] = static_cast<std::int64_t>(cols.size());
  }
  SparseForm A(na, std::move(ptr), std::move(cols), std::move(vals));
  std::vector<double> x(na);
  auto rep = pcg(A, rhs, x, opt.cg_tol, opt.cg_max_mult, nullptr);
  rep.untouched_components = res.report.untouched_components;
  res.report = rep;
  if (!rep.converged)
    throw ConvergenceError("CG stopped at relative residual " + std::to_string(rep.relative_residual) +
                           " after " + std::to_string(rep.iterations) + " iterations");
  for (std::int32_t a = 0; a < na; ++a) res.values[active[a]] = x[a];
  return res;
}

double effective_resistance(const SparseForm& L, std::span<const std::int32_t> a,
                            std::span<const std::int32_t> b, const SolverOptions& opt) {
  if (a.empty() || b.empty()) throw std::invalid_argument("resistance needs two non-empty sets");
  const auto& comp = L.component();
  std::vector<char> in_a(L.component_count(), 0);
  for (auto v : a) in_a[comp[v]] = 1;
  bool linked = false;
  for (auto v : b) linked = linked || in_a[comp[v]];
  if (!linked) throw DisconnectedError("sets lie in different components");
  std::vector<DirichletConstraint> cs{{std::vector<std::int32_t>(a.begin(), a.end()), 1.0},
                                      {std::vector<std::int32_t>(b.begin(), b.end()), 0.0}};
  auto sol = solve_dirichlet(L, cs, opt);
  const double e = L.quadratic(sol.values);
  return 1.0 / e;
}

std::vector<double> apply_pseudoinverse(const SparseForm& L, std::span<const double> b, double tol,
                                        double max_mult, SolveReport* report) {
  Projector proj(L.component(), L.component_count());
  std::vector<double> x(L.dimension());
  auto rep = pcg(L, b, x, tol, max_mult, &proj);
  if (report) *report = rep;
  if (!rep.converged)
    throw ConvergenceError("CG (pseudo-inverse) stopped at relative residual " +
                           std::to_string(rep.relative_residual));
  return x;
}

SpectralGap spectral_gap(const SparseForm& L, const SolverOptions& opt, std::span<const double> start) {
  const auto n = L.dimension();
  if (L.component_count() != 1) throw DisconnectedError("spectral gap needs a connected graph");
  if (n < 2) throw std::invalid_argument("spectral gap needs at least two vertices");
  const double inner_tol = std::min(opt.cg_tol, 1e-11);
  Projector proj(L.component(), 1);

  // Lanczos on L^+ restricted to mean-zero vectors; its top eigenvalue is 1/gap.
  CounterRng rng(0x1a2c305ULL, static_cast<std::uint64_t>(n));
  std::vector<std::vector<double>> V;
  std::vector<double> v(n);
  for (std::int32_t i = 0; i < n; ++i) {
    v[i] = rng.uniform() - 0.5;
    if (!start.empty()) v[i] = start[i] + 1e-3 * v[i];
  }
  proj(v);
  double nv = norm(v);
  for (auto& t : v) t /= nv;
  V.push_back(v);
  std::vector<double> alpha, beta;
  const int max_steps = std::min(n - 1, 300);
  double theta = 0.0;
  SpectralGap out;
  for (int j = 0; j < max_steps; ++j) {
    auto w = apply_pseudoinverse(L, V[j], inner_tol, opt.cg_max_mult);
    const double a = dot(V[j], w);
    alpha.push_back(a);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : V) {
        const double c = dot(q, w);
        for (std::int32_t i = 0; i < n; ++i) w[i] -= c * q[i];
      }
    proj(w);
    const double b = norm(w);
    const int m = j + 1;
    std::vector<double> T(static_cast<std::size_t>(m) * m, 0.0), S;
    for (int i = 0; i < m; ++i) {
      T[i * m + i] = alpha[i];
      if (i + 1 < m) T[i * m + i + 1] = T[(i + 1) * m + i] = beta[i];
    }
    auto ev = detail::symmetric_eigen(m, T, &S);
    theta = ev.back();
    const double resid = b * std::abs(S[(m - 1) * m + (m - 1)]);
    out.lanczos_steps = m;
    // eigenvalue error is at most resid^2 / (distance to the rest of the spectrum)
    const double sep = m > 1 ? theta - ev[m - 2] : theta;
    const bool done = resid * resid <= opt.lanczos_tol * theta * sep && resid <= 1e-3 * theta;
    if (done || b <= 1e-14 * theta || m == max_steps) break;
    beta.push_back(b);
    for (auto& t : w) t /= b;
    V.push_back(std::move(w));
  }
  out.lambda = theta;
  out.gap = 1.0 / theta;
  return out;
}

double quadratic_sup(const SparseForm& L, std::span<const double> functional, const SolverOptions& opt) {
  if (static_cast<std::int32_t>(functional.size()) != L.dimension())
    throw std::invalid_argument("functional has wrong length");
  if (L.component_count() != 1) throw DisconnectedError("quadratic_sup needs a connected subgraph");
  double s = 0.0, s1 = 0.0;
  for (double a : functional) {
    s += a;
    s1 += std::abs(a);
  }
  if (std::abs(s) > 1e-10 * std::max(1.0, s1))
    throw std::invalid_argument("functional does not vanish on constants");
  auto x = apply_pseudoinverse(L, functional, std::min(opt.cg_tol, 1e-12), opt.cg_max_mult);
  // 2 a.x - x'Lx: second-order in the solve error and never above the sup
  return 2.0 * dot(functional, x) - L.quadratic(x);
}

SparseForm trace_form(const SparseForm& L, std::span<const std::int32_t> kept, const SolverOptions& opt) {
  const auto n = L.dimension();
  const auto nv = static_cast<std::int32_t>(kept.size());
  std::vector<std::int32_t> pos(n, -1);
  for (std::int32_t i = 0; i < nv; ++i) {
    if (kept[i] < 0 || kept[i] >= n || pos[kept[i]] >= 0) throw std::invalid_argument("bad kept vertex list");
    pos[kept[i]] = i;
  }
  std::vector<char> comp_has(L.component_count(), 0);
  for (auto v : kept) comp_has[L.component()[v]] = 1;
  for (std::int32_t v = 0; v < n; ++v)
    if (!comp_has[L.component()[v]])
      throw DisconnectedError("complement block is singular: a component has no kept vertex");
  std::vector<std::int32_t> rest, rpos(n, -1);
  for (std::int32_t v = 0; v < n; ++v)
    if (pos[v] < 0) {
      rpos[v] = static_cast<std::int32_t>(rest.size());
      rest.push_back(v);
    }
  const auto nc = static_cast<std::int32_t>(rest.size());

  std::vector<double> T(static_cast<std::size_t>(nv) * nv, 0.0);
  for (std::int32_t i = 0; i < nv; ++i) {
    auto rc = L.row_cols(kept[i]);
    auto rv = L.row_vals(kept[i]);
    for (std::size_t t = 0; t < rc.size(); ++t)
      if (pos[rc[t]] >= 0) T[i * nv + pos[rc[t]]] += rv[t];
  }
  if (nc > 0) {
    // block L_CC and the coupling L_CV
    std::vector<std::int64_t> ptr(nc + 1, 0);
    std::vector<std::int32_t> cols;
    std::vector<double> vals;
    std::vector<std::vector<std::pair<std::int32_t, double>>> couple(nv);
    for (std::int32_t c = 0; c < nc; ++c) {
      auto rc = L.row_cols(rest[c]);
      auto rv = L.row_vals(rest[c]);
      for (std::size_t t = 0; t < rc.size(); ++t) {
        if (rpos[rc[t]] >= 0) {
          cols.push_back(rpos[rc[t]]);
          vals.push_back(rv[t]);
        } else {
          couple[pos[rc[t]]].emplace_back(c, rv[t]);
        }
      }
      ptr[c + 1] = static_cast<std::int64_t>(cols.size());
    }
    SparseForm C(nc, std::move(ptr), std::move(cols), std::move(vals));
    std::vector<double> rhs(nc), x(nc);
    for (std::int32_t j = 0; j < nv; ++j) {
      if (couple[j].empty()) continue;
      std::fill(rhs.begin(), rhs.end(), 0.0);
      for (auto [c, w] : couple[j]) rhs[c] = w;
      auto rep = pcg(C, rhs, x, std::min(opt.cg_tol, 1e-12), opt.cg_max_mult, nullptr);
      if (!rep.converged) throw ConvergenceError("CG failed inside trace_form");
      for (std::int32_t i = 0; i < nv; ++i) {
        double s = 0.0;
        for (auto [c, w] : couple[i]) s += w * x[c];
        T[i * nv + j] -= s;
      }
    }
    // symmetrise the rounding
    for (std::int32_t i = 0; i < nv; ++i)
      for (std::int32_t j = i + 1; j < nv; ++j) {
        const double a = 0.5 * (T[i * nv + j] + T[j * nv + i]);
        T[i * nv + j] = T[j * nv + i] = a;
      }
  }
  std::vector<std::int64_t> ptr(nv + 1, 0);
  std::vector<std::int32_t> cols;
  std::vector<double> vals;
  for (std::int32_t i = 0; i < nv; ++i) {
    for (std::int32_t j = 0; j < nv; ++j)
      if (i == j || T[i * nv + j] != 0.0) {
        cols.push_back(j);
        vals.push_back(T[i * nv + j]);
      }
    ptr[i + 1] = static_cast<std::int64_t>(cols.size());
  }
  return SparseForm(nv, std::move(ptr), std::move(cols), std::move(vals));
}

namespace detail {

std::vector<double> symmetric_eigen(int n, std::vector<double> a, std::vector<double>* vecs) {
  std::vector<double> V(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) V[i * n + i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0, tot = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        tot += a[i * n + j] * a[i * n + j];
        if (i != j) off += a[i * n + j] * a[i * n + j];
      }
    if (off <= 1e-30 * tot || off == 0.0) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double tau = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t), s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = V[k * n + p], vkq = V[k * n + q];
          V[k * n + p] = c * vkp - s * vkq;
          V[k * n + q] = s * vkp + c * vkq;
        }
      }
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a[i * n + i] < a[j * n + j]; });
  std::vector<double> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = a[order[i] * n + order[i]];
  if (vecs) {
    vecs->assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i) (*vecs)[k * n + i] = V[k * n + order[i]];
  }
  return ev;
}

}  // namespace detail
}  // namespace usc
