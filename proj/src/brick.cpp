#include "usc/brick.hpp"

#include "usc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace usc {
namespace {

// Lattice height of the level-m bottom strip in level-n units.
std::int64_t strip_height(const CellBlock& c, int k, int m) {
  std::int64_t h = c.scale;
  for (int i = 0; i < m; ++i) h /= k;
  return h;
}

std::vector<std::int64_t> wall_words(const CellBlock& c, int k, int m) {
  const auto h = strip_height(c, k, m);
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c.y[i] + c.side <= h) out.push_back(c.words[i]);
  return out;
}

std::vector<std::int64_t> brick_words(const CellBlock& c, int k) {
  const auto h1 = strip_height(c, k, 1), h2 = strip_height(c, k, 2);
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c.y[i] + c.side <= h1 && c.y[i] >= h2) out.push_back(c.words[i]);
  return out;
}

// e(w) = sum_j k^{l-j} (w_j - 1) for a bottom-row word of length l.
std::int64_t bottom_offset(std::int64_t index, int l, int N, int k) {
  std::int64_t e = 0, place = 1;
  for (int j = 0; j < l; ++j) {
    const auto digit = index % N;
    if (digit >= k) throw std::logic_error("word is not in the bottom row");
    e += digit * place;
    place *= k;
    index /= N;
  }
  return e;
}

double edge_energy(const CellGraph& g, std::span<const double> f, const std::vector<char>* mask = nullptr) {
  double s = 0.0;
  for (auto [a, b] : g.edges()) {
    if (mask && !((*mask)[a] && (*mask)[b])) continue;
    const double d = f[a] - f[b];
    s += d * d;
  }
  return s;
}

}  // namespace

WallSets wall_sets(const CarpetSpec& spec, int m, int n) {
  if (m < 1 || n < m) throw std::invalid_argument("wall sets need 1 <= m <= n");
  auto cells = level_cells(spec, n);
  WallSets ws;
  ws.m = m;
  ws.n = n;
  ws.T = wall_words(cells, spec.k(), m);
  if (n >= 2) ws.B = brick_words(cells, spec.k());
  return ws;
}

bool wall_decomposition_holds(const CarpetSpec& spec, int n) {
  if (n < 2) throw std::invalid_argument("decomposition needs n >= 2");
  const int N = spec.N();
  std::vector<std::int64_t> rebuilt;
  for (int l = 0; l <= n - 2; ++l) {
    const auto bricks = wall_sets(spec, 1, n - l).B;
    const std::int64_t block = checked_power(N, n - l);
    std::vector<std::int64_t> prefixes{0};
    if (l > 0) prefixes = wall_sets(spec, l, l).T;
    for (auto w : prefixes)
      for (auto eta : bricks) rebuilt.push_back(w * block + eta);
  }
  auto bottom = wall_sets(spec, n, n).T;
  rebuilt.insert(rebuilt.end(), bottom.begin(), bottom.end());
  std::sort(rebuilt.begin(), rebuilt.end());
  if (std::adjacent_find(rebuilt.begin(), rebuilt.end()) != rebuilt.end()) return false;
  return rebuilt == wall_sets(spec, 1, n).T;
}

double BrickFunction::value(std::int64_t word) const {
  auto it = std::lower_bound(words.begin(), words.end(), word);
  if (it == words.end() || *it != word) throw std::out_of_range("word is not a brick cell");
  return values[it - words.begin()];
}

ExtensionBuilder::ExtensionBuilder(CarpetSpec spec, SolverOptions opt) : spec_(std::move(spec)), opt_(opt) {}

const GraphPtr& ExtensionBuilder::graph(int n) {
  auto it = graphs_.find(n);
  if (it == graphs_.end()) it = graphs_.emplace(n, build_graph(spec_, n)).first;
  return it->second;
}

const CellFunction& ExtensionBuilder::h(int n) {
  if (auto it = h_.find(n); it != h_.end()) return it->second;
  if (n < 1) throw std::invalid_argument("h_n needs n >= 1");
  const auto& g = graph(n);
  std::vector<DirichletConstraint> cs{{g->side_vertices(Side::left), 0.0}, {g->side_vertices(Side::right), 1.0}};
  auto sol = solve_dirichlet(laplacian(*g), cs, opt_);
  return h_.emplace(n, CellFunction(g, std::move(sol.values))).first->second;
}

const CellFunction& ExtensionBuilder::h_prime(int n) {
  if (auto it = hp_.find(n); it != hp_.end()) return it->second;
  if (n < 1) throw std::invalid_argument("h'_n needs n >= 1");
  const auto& g = graph(n);
  std::vector<char> in_a(g->size(), 0);
  for (auto w : wall_words(g->cells(), spec_.k(), 1)) {
    auto v = *g->vertex_of(w);
    in_a[v] = 1;
    for (auto u : g->neighbors(v)) in_a[u] = 1;
  }
  DirichletConstraint top{g->side_vertices(Side::top), 1.0}, wall{{}, 0.0};
  for (auto v : top.vertices)
    if (in_a[v])
      throw ValidationError("cell " + to_string(word_from_index(g->word(v), n, spec_.N())) +
                            " touches the top side and the bottom wall neighbourhood");
  for (std::int32_t v = 0; v < g->size(); ++v)
    if (in_a[v]) wall.vertices.push_back(v);
  std::vector<DirichletConstraint> cs{wall, top};
  auto sol = solve_dirichlet(laplacian(*g), cs, opt_);
  return hp_.emplace(n, CellFunction(g, std::move(sol.values))).first->second;
}

const BrickFunction& ExtensionBuilder::brick(int n) {
  if (auto it = bricks_.find(n); it != bricks_.end()) return it->second;
  if (n < 2) throw std::invalid_argument("brick needs n >= 2");
  const int N = spec_.N(), k = spec_.k();
  const auto& g = *graph(n);
  const auto& gp = *graph(n - 1);
  const auto& hn = h(n);
  const auto& hprev = h(n - 1);
  const auto& hp = h_prime(n - 1);
  const std::int64_t block = checked_power(N, n - 1);

  BrickFunction b;
  b.n = n;
  b.words = brick_words(g.cells(), k);
  b.values.resize(b.words.size());
  b.b1.resize(b.words.size());
  b.b2.resize(b.words.size());
  std::vector<char> mask(g.size(), 0);
  std::vector<char> near_wall(gp.size(), 0);
  for (auto w : wall_words(gp.cells(), k, 1)) {
    auto v = *gp.vertex_of(w);
    near_wall[v] = 1;
    for (auto u : gp.neighbors(v)) near_wall[u] = 1;
  }
  std::vector<double> full(g.size(), 0.0);
  for (std::size_t t = 0; t < b.words.size(); ++t) {
    const auto x = b.words[t];
    const auto i0 = x / block;  // column of the bottom-row letter
    const auto w = static_cast<std::int32_t>(x % block);
    const auto v = *g.vertex_of(x);
    const double hpw = hp[w];
    b.b1[t] = hn[v] * hpw;
    b.b2[t] = hprev[w] * (1.0 - hpw);
    // the constant (i-1)/k shift is damped by (1 - h') like the second term
    b.values[t] = b.b1[t] + (1.0 - hpw) * (static_cast<double>(i0) / k + hprev[w] / k);
    mask[v] = 1;
    full[v] = b.values[t];

    const auto& cells = g.cells();
    if (cells.touches(v, Side::left)) b.err_sides = std::max(b.err_sides, std::abs(b.values[t]));
    if (cells.touches(v, Side::right)) b.err_sides = std::max(b.err_sides, std::abs(b.values[t] - 1.0));
    if (gp.cells().touches(w, Side::top)) b.err_top = std::max(b.err_top, std::abs(b.values[t] - hn[v]));
    if (near_wall[w])
      b.err_annulus = std::max(b.err_annulus,
                               std::abs(b.values[t] - (static_cast<double>(i0) / k + hprev[w] / k)));
  }
  b.energy = edge_energy(g, full, &mask);
  b.energy_h = energy(hn);
  b.energy_h_prev = energy(hprev);
  b.energy_hp_prev = energy(hp);
  return bricks_.emplace(n, std::move(b)).first->second;
}

const LinearBoundary& ExtensionBuilder::linear(int n) {
  if (auto it = linear_.find(n); it != linear_.end()) return it->second;
  if (n < 2) throw std::invalid_argument("linear boundary function needs n >= 2");
  const int N = spec_.N(), k = spec_.k();
  const auto& gptr = graph(n);
  const auto& g = *gptr;
  const auto kn = static_cast<double>(checked_power(k, n));

  // g' on the bottom wall: scaled bricks plus the level-n bottom row
  std::vector<double> wall(g.size(), 0.0);
  std::vector<char> assigned(g.size(), 0);
  auto put = [&](std::int64_t word, double value) {
    auto v = *g.vertex_of(word);
    if (assigned[v]) throw std::logic_error("bottom wall pieces overlap");
    assigned[v] = 1;
    wall[v] = value;
  };
  for (int l = 0; l <= n - 2; ++l) {
    const auto& br = brick(n - l);
    const std::int64_t block = checked_power(N, n - l);
    const double scale = std::pow(static_cast<double>(k), -l);
    std::vector<std::int64_t> prefixes{0};
    if (l > 0) prefixes = wall_sets(spec_, l, l).T;
    for (auto w : prefixes) {
      const double e = static_cast<double>(bottom_offset(w, l, N, k));
      for (std::size_t t = 0; t < br.words.size(); ++t) put(w * block + br.words[t], (e + br.values[t]) * scale);
    }
  }
  for (auto w : wall_words(g.cells(), k, n))
    put(w, static_cast<double>(bottom_offset(w, n, N, k)) / (kn - 1.0));
  const auto in_wall = wall_words(g.cells(), k, 1);
  for (auto w : in_wall)
    if (!assigned[*g.vertex_of(w)]) throw std::logic_error("bottom wall not covered by the pieces");

  auto mirror = symmetry_permutation(spec_, Symmetry::v, n);
  const auto& hn = h(n);
  std::vector<double> gv(g.size());
  for (std::int32_t v = 0; v < g.size(); ++v) {
    const auto mv = *g.vertex_of(mirror[g.word(v)]);
    if (assigned[v]) gv[v] = wall[v];
    else if (assigned[mv]) gv[v] = wall[mv];
    else gv[v] = hn[v];
  }
  std::vector<double> f(g.size());
  for (std::int32_t v = 0; v < g.size(); ++v) f[v] = (kn - 1.0) / kn * gv[v] + 0.5 / kn;

  LinearBoundary lb{n, CellFunction(gptr, std::move(f))};
  lb.energy = energy(lb.f);
  lb.bound_sum = 1.0 / kn;
  for (int l = 0; l <= n - 2; ++l) lb.bound_sum += std::pow(static_cast<double>(k), -l) * energy(h(n - l));
  auto target = project(Affine{Rational(1), Rational(0), Rational(0)}, gptr);
  for (auto v : g.boundary_vertices()) lb.boundary_error = std::max(lb.boundary_error, std::abs(lb.f[v] - target[v]));
  for (std::int32_t v = 0; v < g.size(); ++v)
    lb.mirror_error = std::max(lb.mirror_error, std::abs(lb.f[*g.vertex_of(mirror[g.word(v)])] - lb.f[v]));
  return linear_.emplace(n, std::move(lb)).first->second;
}

Separator ExtensionBuilder::separator(const Word& w, int n) {
  const int m = w.level();
  if (m < 1) throw std::invalid_argument("separator needs |w| >= 1");
  const int N = spec_.N(), k = spec_.k();
  const auto& coarse = *graph(m);
  const auto wv = *coarse.vertex_of(word_index(w, N));
  const auto near = coarse.ball(wv, 2);
  if (static_cast<std::int32_t>(near.size()) == coarse.size()) throw std::invalid_argument("far set is empty");
  std::vector<char> is_near(coarse.size(), 0);
  for (auto u : near) is_near[u] = 1;

  const auto& fn = linear(n).f;
  const auto d1 = symmetry_permutation(spec_, Symmetry::d1, n);
  const auto& fine_ptr = graph(m + n);
  const auto& fine = *fine_ptr;
  const std::int64_t block = checked_power(N, n);

  Separator s{w, n, 0.0, 0.0, CellFunction(fine_ptr)};
  s.c1 = std::sqrt(2.0) / contact_constant(spec_).c0;
  s.c2 = 1.0 + 0.5 * s.c1;

  const auto& cc = coarse.cells();
  const double unit = static_cast<double>(cc.scale);
  const double km = static_cast<double>(checked_power(k, m));
  const double p[2] = {(cc.x[wv] + 0.5 * cc.side) / unit, (cc.y[wv] + 0.5 * cc.side) / unit};

  std::vector<double> lo(fine.size(), std::numeric_limits<double>::infinity());
  for (int j = 0; j < 2; ++j)
    for (double sign : {1.0, -1.0}) {
      // u = sign k^m c1 (y_j - p_j) + c2, pulled back through each level-m map
      for (std::int32_t c = 0; c < coarse.size(); ++c) {
        const auto& a = matrix(cc.sym[c]);
        const int row[2] = {j == 0 ? a.a11 : a.a21, j == 0 ? a.a12 : a.a22};
        const int shift = j == 0 ? a.c1 : a.c2;
        const double corner = (j == 0 ? cc.x[c] : cc.y[c]) / unit;
        const double al1 = sign * s.c1 * row[0], al2 = sign * s.c1 * row[1];
        const double gamma = sign * s.c1 * (shift + km * (corner - p[j])) + s.c2;
        const std::int64_t base = coarse.word(c) * block;
        for (std::int64_t tau = 0; tau < block; ++tau) {
          const auto v = static_cast<std::int32_t>(base + tau);  // full graph: vertex == word
          const double val = al1 * fn[static_cast<std::int32_t>(tau)] +
                             al2 * fn[static_cast<std::int32_t>(d1[tau])] + gamma;
          lo[v] = std::min(lo[v], val);
        }
      }
    }
  s.energy_min = edge_energy(fine, lo);
  for (std::int32_t v = 0; v < fine.size(); ++v) s.g[v] = std::min(std::max(lo[v], 0.0), 1.0);
  s.energy = energy(s.g);
  s.plateau_one = s.plateau_zero = true;
  for (std::int32_t v = 0; v < fine.size(); ++v) {
    const auto parent = static_cast<std::int32_t>(fine.word(v) / block);
    if (parent == wv && s.g[v] != 1.0) s.plateau_one = false;
    if (!is_near[parent] && s.g[v] != 0.0) s.plateau_zero = false;
  }
  return s;
}

CellFunction cross_minimizer(const CarpetSpec& spec, int n, const SolverOptions& opt) {
  return ExtensionBuilder(spec, opt).h(n);
}

CellFunction annulus_minimizer(const CarpetSpec& spec, int n, const SolverOptions& opt) {
  return ExtensionBuilder(spec, opt).h_prime(n);
}

BrickFunction brick_function(const CarpetSpec& spec, int n, const SolverOptions& opt) {
  return ExtensionBuilder(spec, opt).brick(n);
}

LinearBoundary linear_boundary_function(const CarpetSpec& spec, int n, const SolverOptions& opt) {
  return ExtensionBuilder(spec, opt).linear(n);
}

Separator separator_function(const CarpetSpec& spec, const Word& w, int n, const SolverOptions& opt) {
  return ExtensionBuilder(spec, opt).separator(w, n);
}

double chain_resistance(const CarpetSpec& spec, int n, int l, const SolverOptions& opt) {
  const int k = spec.k();
  if (l < 2) throw std::invalid_argument("chain needs at least two cells");
  int m = 1;
  while (checked_power(k, m) < l) ++m;
  auto cells = level_cells(spec, m);
  std::vector<std::pair<std::int64_t, std::int64_t>> row;  // (x, word)
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (cells.y[i] == 0) row.emplace_back(cells.x[i], cells.words[i]);
  std::sort(row.begin(), row.end());
  if (static_cast<int>(row.size()) < l) throw std::invalid_argument("bottom row shorter than the chain");
  for (int i = 1; i < l; ++i)
    if (row[i].first != row[i - 1].first + cells.side) throw std::invalid_argument("bottom row is not a straight chain");
  const std::int64_t block = checked_power(spec.N(), n);
  std::vector<std::int64_t> words;
  for (int i = 0; i < l; ++i)
    for (std::int64_t t = 0; t < block; ++t) words.push_back(row[i].second * block + t);
  auto g = build_graph(spec, m + n, words);
  std::vector<std::int32_t> a, b;
  for (std::int32_t v = 0; v < g->size(); ++v) {
    const auto parent = g->word(v) / block;
    if (parent == row.front().second) a.push_back(v);
    if (parent == row[l - 1].second) b.push_back(v);
  }
  return effective_resistance(laplacian(*g), a, b, opt);
}

}  // namespace usc
