#include "usc/layout.hpp"

#include "usc/errors.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

namespace usc {
namespace {

struct LevelOne {
  std::int64_t scale;  // L k
  std::int64_t side;   // L
  std::vector<std::int64_t> cx, cy;
  std::vector<Symmetry> sym;
};

LevelOne level_one(const CarpetSpec& spec) {
  LevelOne l;
  l.side = spec.lattice_denominator();
  l.scale = l.side * spec.k();
  for (const auto& m : spec.maps()) {
    l.cx.push_back((m.tx * l.scale).convert_to<std::int64_t>());
    l.cy.push_back((m.ty * l.scale).convert_to<std::int64_t>());
    l.sym.push_back(m.symmetry);
  }
  return l;
}

// Corner of the child square F_w(F_i(unit square)) one level down.
inline void child_corner(const LevelOne& l, int k, std::int64_t x, std::int64_t y, Symmetry g,
                         int i, std::int64_t& cx, std::int64_t& cy) {
  const auto& m = matrix(g);
  const std::int64_t px = l.cx[i], py = l.cy[i], off = l.scale - l.side;
  cx = k * x + m.a11 * px + m.a12 * py + m.c1 * off;
  cy = k * y + m.a21 * px + m.a22 * py + m.c2 * off;
}

void check_size(std::int64_t roots, int N, int m) {
  std::int64_t total = roots;
  for (int i = 0; i < m; ++i) {
    total *= N;
    if (total > kMaxCells)
      throw ResourceError("cell count exceeds " + std::to_string(kMaxCells));
  }
}

}  // namespace

bool CellBlock::touches(std::size_t i, Side s) const {
  switch (s) {
    case Side::bottom: return y[i] == 0;
    case Side::right: return x[i] + side == scale;
    case Side::top: return y[i] + side == scale;
    case Side::left: return x[i] == 0;
  }
  return false;
}

bool CellBlock::adjacent(std::size_t i, std::size_t j) const {
  return i != j && std::abs(x[i] - x[j]) <= side && std::abs(y[i] - y[j]) <= side;
}

CellBlock level_cells(const CarpetSpec& spec, int n) {
  if (n < 0) throw std::invalid_argument("negative level");
  CellBlock root;
  root.level = 0;
  root.side = spec.lattice_denominator();
  root.scale = root.side;
  root.words = {0};
  root.x = {0};
  root.y = {0};
  root.sym = {Symmetry::id};
  return expand(spec, root, n);
}

CellBlock expand(const CarpetSpec& spec, const CellBlock& roots, int m) {
  check_size(static_cast<std::int64_t>(roots.size()), spec.N(), m);
  const int k = spec.k();
  const int N = spec.N();
  checked_power(k, roots.level + m);
  checked_power(N, roots.level + m);
  const auto l = level_one(spec);
  CellBlock cur = roots;
  for (int step = 0; step < m; ++step) {
    CellBlock next;
    next.level = cur.level + 1;
    next.scale = cur.scale * k;
    next.side = cur.side;
    const std::size_t n = cur.size() * N;
    next.words.resize(n);
    next.x.resize(n);
    next.y.resize(n);
    next.sym.resize(n);
    for (std::size_t c = 0; c < cur.size(); ++c) {
      for (int i = 0; i < N; ++i) {
        const std::size_t t = c * N + i;
        next.words[t] = cur.words[c] * N + i;
        child_corner(l, k, cur.x[c], cur.y[c], cur.sym[c], i, next.x[t], next.y[t]);
        next.sym[t] = compose(cur.sym[c], l.sym[i]);
      }
    }
    cur = std::move(next);
  }
  return cur;
}

CellBlock cells_of(const CarpetSpec& spec, int n, std::span<const std::int64_t> words) {
  const int k = spec.k();
  const int N = spec.N();
  const std::int64_t count = checked_power(N, n);
  const auto l = level_one(spec);
  CellBlock b;
  b.level = n;
  b.side = l.side;
  b.scale = l.side * checked_power(k, n);
  std::vector<int> letters(n);
  for (auto w : words) {
    if (w < 0 || w >= count) throw std::invalid_argument("word index out of range");
    std::int64_t r = w;
    for (int i = n - 1; i >= 0; --i) {
      letters[i] = static_cast<int>(r % N);
      r /= N;
    }
    std::int64_t x = 0, y = 0;
    Symmetry g = Symmetry::id;
    for (int i = 0; i < n; ++i) {
      std::int64_t cx, cy;
      child_corner(l, k, x, y, g, letters[i], cx, cy);
      x = cx;
      y = cy;
      g = compose(g, l.sym[letters[i]]);
    }
    b.words.push_back(w);
    b.x.push_back(x);
    b.y.push_back(y);
    b.sym.push_back(g);
  }
  return b;
}

std::vector<std::int64_t> symmetry_permutation(const CarpetSpec& spec, Symmetry g, int n) {
  const int N = spec.N();
  const auto l = level_one(spec);
  std::map<std::pair<std::int64_t, std::int64_t>, int> at;
  for (int i = 0; i < N; ++i) at[{l.cx[i], l.cy[i]}] = i;
  // table[h][i] = (i', h'): h o F_i = F_i' o h'
  std::array<std::vector<std::pair<int, Symmetry>>, 8> table;
  for (auto h : kSymmetries) {
    const auto& m = matrix(h);
    auto& row = table[static_cast<std::size_t>(h)];
    for (int i = 0; i < N; ++i) {
      std::int64_t ax = m.a11 * l.cx[i] + m.a12 * l.cy[i] + m.c1 * l.scale;
      std::int64_t ay = m.a21 * l.cx[i] + m.a22 * l.cy[i] + m.c2 * l.scale;
      std::int64_t bx = ax + (m.a11 + m.a12) * l.side;
      std::int64_t by = ay + (m.a21 + m.a22) * l.side;
      auto it = at.find({std::min(ax, bx), std::min(ay, by)});
      if (it == at.end())
        throw ValidationError("spec is not symmetric under " + std::string(name(h)));
      int t = it->second;
      row.emplace_back(t, compose(inverse(l.sym[t]), compose(h, l.sym[i])));
    }
  }
  const std::int64_t count = checked_power(N, n);
  if (count > kMaxCells) throw ResourceError("cell count exceeds guard");
  std::vector<std::int64_t> out(count);
  std::vector<int> letters(n);
  for (std::int64_t w = 0; w < count; ++w) {
    std::int64_t r = w;
    for (int i = n - 1; i >= 0; --i) {
      letters[i] = static_cast<int>(r % N);
      r /= N;
    }
    Symmetry h = g;
    std::int64_t img = 0;
    for (int i = 0; i < n; ++i) {
      auto [t, nh] = table[static_cast<std::size_t>(h)][letters[i]];
      img = img * N + t;
      h = nh;
    }
    out[w] = img;
  }
  return out;
}

std::vector<std::pair<std::int32_t, std::int32_t>> block_adjacency(const CellBlock& cells) {
  const std::int64_t width = cells.scale / cells.side + 3;
  auto key = [&](std::int64_t bx, std::int64_t by) { return (bx + 1) * width + (by + 1); };
  std::unordered_map<std::int64_t, std::vector<std::int32_t>> buckets;
  buckets.reserve(cells.size() * 2);
  for (std::size_t i = 0; i < cells.size(); ++i)
    buckets[key(cells.x[i] / cells.side, cells.y[i] / cells.side)].push_back(static_cast<std::int32_t>(i));
  std::vector<std::pair<std::int32_t, std::int32_t>> out;
  std::vector<std::int32_t> found;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const std::int64_t bx = cells.x[i] / cells.side, by = cells.y[i] / cells.side;
    found.clear();
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        auto it = buckets.find(key(bx + dx, by + dy));
        if (it == buckets.end()) continue;
        for (auto j : it->second)
          if (static_cast<std::size_t>(j) > i && cells.adjacent(i, j)) found.push_back(j);
      }
    std::sort(found.begin(), found.end());
    for (auto j : found) out.emplace_back(static_cast<std::int32_t>(i), j);
  }
  return out;
}

}  // namespace usc
