#include "usc/boundary_trace.hpp"

#include "usc/cell_graph.hpp"
#include "usc/errors.hpp"
#include "usc/layout.hpp"
#include "usc/parallel.hpp"
#include "usc/poincare.hpp"
#include "usc/random.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>

namespace usc {
namespace {

std::int64_t ipow(std::int64_t b, int e) { return checked_power(b, e); }

double hat(double t) { return std::max(0.0, 1.0 - std::abs(t)); }

}  // namespace

double besov_seminorm_unit(std::span<const double> samples, int k, double r) {
  if (samples.size() < 2) throw std::invalid_argument("need at least two samples");
  int M = 0;
  std::int64_t count = 1;
  while (count + 1 < static_cast<std::int64_t>(samples.size())) {
    count *= k;
    ++M;
  }
  if (count + 1 != static_cast<std::int64_t>(samples.size()))
    throw std::invalid_argument("sample count is not k^M + 1");
  double total = 0.0, weight = 1.0;
  std::int64_t stride = count;
  for (int m = 0; m <= M; ++m) {
    double s = 0.0;
    for (std::int64_t i = 0; i + stride < static_cast<std::int64_t>(samples.size()); i += stride) {
      const double d = samples[i + stride] - samples[i];
      s += d * d;
    }
    total += weight * s;
    weight /= r;
    stride /= k;
  }
  return total;
}

std::uint64_t BoundaryFunction::key(std::int64_t X, std::int64_t Y) const {
  return static_cast<std::uint64_t>(X) * static_cast<std::uint64_t>(unit_ + 1) + static_cast<std::uint64_t>(Y);
}

BoundaryFunction::BoundaryFunction(const CarpetSpec& spec, int n, int depth, const PlaneFunction& u)
    : n_(n), depth_(depth), k_(spec.k()) {
  if (n < 0 || depth < 0) throw std::invalid_argument("negative level or depth");
  auto cells = level_cells(spec, n);
  const std::int64_t f = ipow(k_, depth);
  unit_ = cells.scale * f;
  spacing_ = cells.side;
  const std::int64_t len = cells.side * f;
  const double inv = 1.0 / static_cast<double>(unit_);
  auto point = [&](std::int64_t X, std::int64_t Y) {
    auto [it, fresh] = index_.emplace(key(X, Y), static_cast<std::int64_t>(values_.size()));
    if (fresh) values_.push_back(u(static_cast<double>(X) * inv, static_cast<double>(Y) * inv));
    return it->second;
  };
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const std::int64_t x0 = cells.x[c] * f, y0 = cells.y[c] * f;
    const SideRef s4[4] = {{x0, y0, 1, 0}, {x0 + len, y0, 0, 1}, {x0, y0 + len, 1, 0}, {x0, y0, 0, 1}};
    for (const auto& s : s4) {
      for (std::int64_t j = 0; j <= f; ++j) point(s.x0 + j * spacing_ * s.dx, s.y0 + j * spacing_ * s.dy);
      sides_.push_back(s);
    }
  }
}

std::vector<double> BoundaryFunction::side_samples(std::int64_t side) const {
  const auto& s = sides_.at(side);
  const std::int64_t f = ipow(k_, depth_);
  std::vector<double> out(f + 1);
  for (std::int64_t j = 0; j <= f; ++j)
    out[j] = values_[index_.at(key(s.x0 + j * spacing_ * s.dx, s.y0 + j * spacing_ * s.dy))];
  return out;
}

double BoundaryFunction::value_at(std::int64_t X, std::int64_t Y) const {
  auto it = index_.find(key(X, Y));
  if (it == index_.end()) throw std::out_of_range("not a sample point");
  return values_[it->second];
}

double besov_seminorm_boundary(const BoundaryFunction& u, double r) {
  const int k = u.k();
  double s = 0.0;
  for (std::int64_t i = 0; i < u.side_count(); ++i) s += besov_seminorm_unit(u.side_samples(i), k, r);
  return s * std::pow(r, -u.level());
}

std::int64_t boundary_graph_vertex_count(int k, int depth) {
  std::int64_t n = 0;
  for (int m = 0; m <= depth; ++m) n += ipow(k, m) + 1;
  return n;
}

std::int32_t BoundaryGraph::vertex(int m, std::int64_t l) const {
  std::int64_t off = 0;
  for (int j = 0; j < m; ++j) off += checked_power(k, j) + 1;
  return static_cast<std::int32_t>(off + l);
}

double BoundaryGraph::x(std::int32_t v) const {
  return static_cast<double>(vertices[v].l) / static_cast<double>(checked_power(k, vertices[v].m));
}

double BoundaryGraph::y(std::int32_t v) const {
  return 1.0 / static_cast<double>(checked_power(k, vertices[v].m + 1));
}

BoundaryGraph boundary_graph(int k, int depth) {
  if (depth < 1) throw std::invalid_argument("boundary graph needs depth >= 1");
  if (boundary_graph_vertex_count(k, depth) > kMaxCells) throw ResourceError("boundary graph too large");
  BoundaryGraph g;
  g.k = k;
  g.depth = depth;
  for (int m = 0; m <= depth; ++m)
    for (std::int64_t l = 0; l <= ipow(k, m); ++l) g.vertices.push_back({m, l});
  for (int m = 0; m < depth; ++m) {
    const std::int32_t top = g.vertex(m, 0), low = g.vertex(m + 1, 0);
    for (std::int64_t b = 0; b < ipow(k, m); ++b) {
      const auto t0 = top + static_cast<std::int32_t>(b);
      const auto l0 = low + static_cast<std::int32_t>(b * k);
      g.edges.push_back({t0, t0 + 1, m});
      g.edges.push_back({t0, l0, m});
      g.edges.push_back({t0 + 1, l0 + k, m});
      for (int i = 0; i < k; ++i) g.edges.push_back({l0 + i, l0 + i + 1, m});
    }
  }
  return g;
}

BoundaryGraph boundary_graph(const CarpetSpec& spec, int depth) { return boundary_graph(spec.k(), depth); }

double boundary_graph_energy(const BoundaryGraph& g, std::span<const double> f, double r) {
  if (f.size() != g.vertices.size()) throw std::invalid_argument("value count does not match the graph");
  std::vector<double> per_level(g.depth, 0.0);
  for (const auto& e : g.edges) {
    const double d = f[e.a] - f[e.b];
    per_level[e.level] += d * d;
  }
  double s = 0.0, w = 1.0;
  for (double v : per_level) {
    s += w * v;
    w /= r;
  }
  return s;
}

double boundary_graph_energy(const BoundaryGraph& g, const PlaneFunction& f, double r) {
  std::vector<double> vals(g.vertices.size());
  for (std::size_t v = 0; v < vals.size(); ++v) {
    auto id = static_cast<std::int32_t>(v);
    vals[v] = f(g.x(id), g.y(id));
  }
  return boundary_graph_energy(g, vals, r);
}

TraceBoundReport trace_bound_check(const PlaneFunction& f, int k, int n, int depth) {
  if (n < 0 || depth <= n) throw std::invalid_argument("need 0 <= n < depth");
  TraceBoundReport rep;
  rep.n = n;
  rep.depth = depth;
  const std::int64_t kn = ipow(k, n);
  auto height = [&](int j) { return 1.0 / static_cast<double>(ipow(k, j)); };
  auto xs = [&](std::int64_t l) { return static_cast<double>(l) / static_cast<double>(kn); };

  double lhs = 0.0;
  for (std::int64_t l = 0; l < kn; ++l) {
    const double d = f(xs(l), 0.0) - f(xs(l + 1), 0.0);
    lhs += d * d;
  }
  rep.lhs = std::sqrt(lhs);

  for (int m = n; m < depth; ++m) {
    const std::int64_t km = ipow(k, m);
    const double w = 1.0 / static_cast<double>(km);
    const double y1 = height(m + 1), y2 = height(m + 2);
    double s = 0.0;
    auto add = [&](double ax, double ay, double bx, double by) {
      const double d = f(ax, ay) - f(bx, by);
      s += d * d;
    };
    for (std::int64_t b = 0; b < km; ++b) {
      const double a = static_cast<double>(b) * w;
      const double a1 = static_cast<double>(b + 1) * w;
      add(a, y1, a1, y1);
      add(a, y1, a, y2);
      add(a1, y1, a1, y2);
      for (int i = 0; i < k; ++i)
        add(a + i * w / k, y2, (i + 1 == k) ? a1 : a + (i + 1) * w / k, y2);
    }
    rep.brick_sum += std::sqrt(s);
  }
  rep.brick_sum *= 3.0;

  std::vector<double> rho(kn + 1);
  const double bottom = height(depth + 1);
  for (std::int64_t l = 0; l <= kn; ++l) {
    const double x = xs(l);
    rho[l] = f(x, 0.0) - f(x, bottom);
    double telescoped = f(x, height(n + 1));
    for (int m = n; m < depth; ++m) telescoped += f(x, height(m + 2)) - f(x, height(m + 1));
    rep.identity_error = std::max(rep.identity_error, std::abs(telescoped + rho[l] - f(x, 0.0)));
  }
  double t = 0.0;
  for (std::int64_t l = 0; l < kn; ++l) t += (rho[l] - rho[l + 1]) * (rho[l] - rho[l + 1]);
  rep.tail = std::sqrt(t);
  return rep;
}

PlaneFunction multiresolution_datum(int k, int levels, double alpha, std::uint64_t seed, std::uint64_t stream) {
  auto coef = std::make_shared<std::vector<std::vector<double>>>();
  CounterRng rng(seed, stream);
  for (int j = 0; j < levels; ++j) {
    const std::int64_t s = ipow(k, j) + 1;
    std::vector<double> c(s * s);
    const double amp = std::pow(static_cast<double>(k), -alpha * j);
    for (auto& v : c) v = amp * rng.normal();
    coef->push_back(std::move(c));
  }
  return [coef, k](double x, double y) {
    double out = 0.0;
    std::int64_t s = 1;
    for (const auto& c : *coef) {
      const std::int64_t a = std::clamp<std::int64_t>(static_cast<std::int64_t>(x * s), 0, s - 1);
      const std::int64_t b = std::clamp<std::int64_t>(static_cast<std::int64_t>(y * s), 0, s - 1);
      for (std::int64_t i = a; i <= a + 1; ++i)
        for (std::int64_t j = b; j <= b + 1; ++j) out += c[i * (s + 1) + j] * hat(x * s - i) * hat(y * s - j);
      s *= k;
    }
    return out;
  };
}

std::vector<TraceDatum> trace_data(int k, int trials, std::uint64_t seed) {
  std::vector<TraceDatum> d;
  d.push_back({"x1", [](double x, double) { return x; }});
  d.push_back({"x2", [](double, double y) { return y; }});
  const double mid[4][2] = {{0.5, 0.0}, {1.0, 0.5}, {0.5, 1.0}, {0.0, 0.5}};
  const char* names[4] = {"bump-bottom", "bump-right", "bump-top", "bump-left"};
  for (int s = 0; s < 4; ++s) {
    const double cx = mid[s][0], cy = mid[s][1];
    d.push_back({names[s], [cx, cy](double x, double y) { return std::max(0.0, 1.0 - 4.0 * std::hypot(x - cx, y - cy)); }});
  }
  for (int t = 0; t < trials; ++t)
    d.push_back({"random-" + std::to_string(t), multiresolution_datum(k, 3, 0.8, seed, static_cast<std::uint64_t>(t))});
  return d;
}

TraceReport trace_ratio_experiment(const CarpetSpec& spec, int n, int m, double r_hat, int trials,
                                   std::uint64_t seed, const SolverOptions& opt) {
  if (n < 0 || m < n + 2) throw std::invalid_argument("trace experiment needs m >= n + 2");
  if (!(r_hat > 0.0 && r_hat < 1.0)) throw std::invalid_argument("r_hat must lie in (0, 1)");
  const int k = spec.k(), N = spec.N();
  TraceReport rep;
  rep.n = n;
  rep.m = m;
  rep.r_hat = r_hat;

  auto g = build_graph(spec, m);
  auto L = laplacian(*g);
  const double cross = cross_resistance(*g, L, opt).value();
  const auto& cells = g->cells();
  const std::int64_t up = ipow(k, m - n);   // level-n side in level-m cells
  const std::int64_t block = ipow(N, m - n);
  auto parents = level_cells(spec, n);
  const int depth = m - n + 3;
  const std::int64_t refine = ipow(k, depth - (m - n));  // level-m lattice -> sample lattice

  // level-m cells touching the boundary of their level-n parent, with the
  // nearest sample point (ties toward the smaller coordinate)
  struct Anchor {
    std::int32_t v;
    std::int64_t X, Y;
  };
  std::vector<Anchor> anchors;
  const std::int64_t side = cells.side;
  const std::int64_t pside = side * up;
  for (std::int32_t v = 0; v < g->size(); ++v) {
    const auto p = static_cast<std::size_t>(cells.words[v] / block);
    const std::int64_t px = parents.x[p] * up, py = parents.y[p] * up;
    const std::int64_t x = cells.x[v], y = cells.y[v];
    const bool on[4] = {y == py, x + side == px + pside, y + side == py + pside, x == px};
    if (!(on[0] || on[1] || on[2] || on[3])) continue;
    // doubled sample-lattice coordinates of the centre
    const std::int64_t cx2 = (2 * x + side) * refine, cy2 = (2 * y + side) * refine;
    const std::int64_t sp2 = 2 * side;  // doubled sample spacing (spacing = side in sample units)
    auto snap = [&](std::int64_t c2, std::int64_t lo2) {
      // nearest multiple of the spacing from lo, ties toward lo side
      const std::int64_t rel = c2 - lo2;
      std::int64_t j = rel / sp2;
      if (2 * (rel - j * sp2) > sp2) ++j;
      return lo2 + j * sp2;
    };
    const std::int64_t PX2 = 2 * px * refine, PY2 = 2 * py * refine, PS2 = 2 * pside * refine;
    std::int64_t bestX = 0, bestY = 0;
    __int128 bestD = -1;
    auto consider = [&](std::int64_t X2, std::int64_t Y2) {
      const __int128 dx = X2 - cx2, dy = Y2 - cy2;
      const __int128 d = dx * dx + dy * dy;
      if (bestD < 0 || d < bestD || (d == bestD && std::pair(X2, Y2) < std::pair(bestX, bestY))) {
        bestD = d;
        bestX = X2;
        bestY = Y2;
      }
    };
    if (on[0]) consider(snap(cx2, PX2), PY2);
    if (on[2]) consider(snap(cx2, PX2), PY2 + PS2);
    if (on[3]) consider(PX2, snap(cy2, PY2));
    if (on[1]) consider(PX2 + PS2, snap(cy2, PY2));
    anchors.push_back({v, bestX / 2, bestY / 2});
  }

  auto data = trace_data(k, trials, seed);
  rep.trials = parallel_map<TraceTrial>(data.size(), [&](std::size_t i) {
    TraceTrial t;
    t.id = static_cast<int>(i);
    t.label = data[i].label;
    BoundaryFunction bf(spec, n, depth, data[i].u);
    t.seminorm2 = besov_seminorm_boundary(bf, r_hat);
    std::vector<DirichletConstraint> cs;
    cs.reserve(anchors.size());
    for (const auto& a : anchors) cs.push_back({{a.v}, bf.value_at(a.X, a.Y)});
    auto sol = solve_dirichlet(L, cs, opt);
    t.energy = L.quadratic(sol.values) * cross;
    t.ratio = t.seminorm2 > 0.0 ? t.energy / t.seminorm2 : 0.0;
    return t;
  });
  bool first = true;
  for (const auto& t : rep.trials) {
    if (t.seminorm2 <= 0.0) {
      ++rep.excluded;
      continue;
    }
    rep.min_ratio = first ? t.ratio : std::min(rep.min_ratio, t.ratio);
    rep.max_ratio = first ? t.ratio : std::max(rep.max_ratio, t.ratio);
    first = false;
  }
  return rep;
}

}  // namespace usc
