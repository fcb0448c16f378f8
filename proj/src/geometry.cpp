#include "usc/geometry.hpp"

#include "usc/errors.hpp"
#include "usc/layout.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

namespace usc {
namespace {

constexpr std::array<SymmetryMatrix, 8> kMatrices{{
    {1, 0, 0, 1, 0, 0},     // id
    {1, 0, 0, -1, 0, 1},    // v
    {-1, 0, 0, 1, 1, 0},    // h
    {0, 1, 1, 0, 0, 0},     // d1
    {0, -1, -1, 0, 1, 1},   // d2
    {0, -1, 1, 0, 1, 0},    // r1
    {-1, 0, 0, -1, 1, 1},   // r2
    {0, 1, -1, 0, 0, 1},    // r3
}};

constexpr std::array<std::string_view, 8> kNames{"id", "v", "h", "d1", "d2", "r1", "r2", "r3"};

Symmetry from_linear(int a11, int a12, int a21, int a22) {
  for (std::size_t i = 0; i < kMatrices.size(); ++i) {
    const auto& m = kMatrices[i];
    if (m.a11 == a11 && m.a12 == a12 && m.a21 == a21 && m.a22 == a22)
      return static_cast<Symmetry>(i);
  }
  throw std::logic_error("not a symmetry of the square");
}

std::string point_str(const Point& p) {
  return "(" + to_string(p.x) + ", " + to_string(p.y) + ")";
}

std::vector<Square> level_one_squares(const CarpetSpec& spec) {
  std::vector<Square> out;
  Rational s(1, spec.k());
  for (const auto& m : spec.maps()) out.push_back({m.tx, m.ty, s});
  return out;
}

Square image_square(Symmetry g, const Square& sq) {
  Point a = apply(g, {sq.x, sq.y});
  Point b = apply(g, {sq.x + sq.side, sq.y + sq.side});
  return {std::min(a.x, b.x), std::min(a.y, b.y), sq.side};
}

bool interiors_overlap(const Square& a, const Square& b) {
  return a.x < b.x + b.side && b.x < a.x + a.side && a.y < b.y + b.side && b.y < a.y + a.side;
}

// Union of the side-length-1/k segments that the squares leave on one
// side of the unit square covers that side.
std::optional<std::string> side_uncovered(const std::vector<Square>& squares, Side side) {
  std::vector<std::pair<Rational, Rational>> iv;
  for (const auto& s : squares) {
    switch (side) {
      case Side::bottom:
        if (s.y == 0) iv.emplace_back(s.x, s.x + s.side);
        break;
      case Side::top:
        if (s.y + s.side == 1) iv.emplace_back(s.x, s.x + s.side);
        break;
      case Side::left:
        if (s.x == 0) iv.emplace_back(s.y, s.y + s.side);
        break;
      case Side::right:
        if (s.x + s.side == 1) iv.emplace_back(s.y, s.y + s.side);
        break;
    }
  }
  std::sort(iv.begin(), iv.end());
  Rational reach = 0;
  for (const auto& [lo, hi] : iv) {
    if (lo > reach) return "gap [" + to_string(reach) + ", " + to_string(lo) + "]";
    reach = std::max(reach, hi);
  }
  if (reach < 1) return "gap [" + to_string(reach) + ", 1/1]";
  return std::nullopt;
}

}  // namespace

const SymmetryMatrix& matrix(Symmetry g) { return kMatrices[static_cast<std::size_t>(g)]; }

Symmetry compose(Symmetry outer, Symmetry inner) {
  const auto& o = matrix(outer);
  const auto& i = matrix(inner);
  return from_linear(o.a11 * i.a11 + o.a12 * i.a21, o.a11 * i.a12 + o.a12 * i.a22,
                     o.a21 * i.a11 + o.a22 * i.a21, o.a21 * i.a12 + o.a22 * i.a22);
}

Symmetry inverse(Symmetry g) {
  for (auto h : kSymmetries)
    if (compose(g, h) == Symmetry::id) return h;
  throw std::logic_error("group table broken");
}

std::string_view name(Symmetry g) { return kNames[static_cast<std::size_t>(g)]; }

Symmetry parse_symmetry(std::string_view s) {
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (kNames[i] == s) return static_cast<Symmetry>(i);
  throw SpecError("unknown symmetry '" + std::string(s) + "'");
}

Point apply(Symmetry g, const Point& p) {
  const auto& m = matrix(g);
  return {m.a11 * p.x + m.a12 * p.y + m.c1, m.a21 * p.x + m.a22 * p.y + m.c2};
}

CarpetSpec::CarpetSpec(int k, std::vector<Similarity> maps) : k_(k), maps_(std::move(maps)) {
  if (k_ < 3) throw SpecError("k must be at least 3");
  const int n = N();
  if (n < 4 * (k_ - 1) || n > k_ * k_)
    throw SpecError("N = " + std::to_string(n) + " outside [4(k-1), k^2]");
  const Rational hi = 1 - Rational(1, k_);
  BigInt lcm = 1;
  for (int i = 0; i < n; ++i) {
    const auto& m = maps_[i];
    if (m.tx < 0 || m.ty < 0 || m.tx > hi || m.ty > hi)
      throw SpecError("translation of map " + std::to_string(i + 1) + " outside [0, 1-1/k]");
    for (const auto& t : {m.tx, m.ty}) {
      BigInt d = denominator(t);
      lcm = lcm / boost::multiprecision::gcd(lcm, d) * d;
    }
  }
  if (lcm > BigInt(1'000'000'000)) throw SpecError("translation denominators too large");
  lattice_ = lcm.convert_to<std::int64_t>();
}

Point CarpetSpec::apply(int letter, const Point& p) const {
  const auto& m = map(letter);
  Point q = usc::apply(m.symmetry, p);
  return {q.x / k_ + m.tx, q.y / k_ + m.ty};
}

Word Word::operator+(const Word& tail) const {
  auto l = letters_;
  l.insert(l.end(), tail.letters_.begin(), tail.letters_.end());
  return Word(std::move(l));
}

std::string to_string(const Word& w) {
  std::string s;
  for (int i = 0; i < w.level(); ++i) {
    if (i) s += '.';
    s += std::to_string(w[i]);
  }
  return s;
}

std::int64_t word_index(const Word& w, int N) {
  std::int64_t idx = 0;
  for (int l : w.letters()) {
    if (l < 1 || l > N) throw std::invalid_argument("letter out of range");
    idx = idx * N + (l - 1);
  }
  return idx;
}

Word word_from_index(std::int64_t index, int level, int N) {
  std::vector<int> l(level);
  for (int i = level - 1; i >= 0; --i) {
    l[i] = static_cast<int>(index % N) + 1;
    index /= N;
  }
  return Word(std::move(l));
}

std::int64_t checked_power(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (r > (std::int64_t{1} << 62) / base) throw ResourceError("integer overflow in power");
    r *= base;
  }
  return r;
}

bool Square::contains(const Point& p) const {
  return p.x >= x && p.x <= x + side && p.y >= y && p.y <= y + side;
}

Point Square::center() const { return {x + side / 2, y + side / 2}; }

bool ValidationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

ValidationReport validate(const CarpetSpec& spec) {
  ValidationReport rep;
  const auto sq = level_one_squares(spec);
  const int n = spec.N();
  const int k = spec.k();

  {
    ValidationReport::Check c{"open-set-condition", true, ""};
    for (int i = 0; i < n && c.passed; ++i)
      for (int j = i + 1; j < n; ++j)
        if (interiors_overlap(sq[i], sq[j])) {
          c.passed = false;
          c.witness = "maps " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                      " overlap at " + point_str({sq[j].x, sq[j].y});
          break;
        }
    rep.checks.push_back(c);
  }
  {
    ValidationReport::Check c{"connectivity", true, ""};
    std::vector<bool> seen(n, false);
    std::queue<int> q;
    q.push(0);
    seen[0] = true;
    while (!q.empty()) {
      int a = q.front();
      q.pop();
      for (int b = 0; b < n; ++b) {
        if (seen[b]) continue;
        const auto& s = sq[a];
        const auto& t = sq[b];
        bool touch = s.x <= t.x + t.side && t.x <= s.x + s.side && s.y <= t.y + t.side &&
                     t.y <= s.y + s.side;
        if (touch) {
          seen[b] = true;
          q.push(b);
        }
      }
    }
    for (int b = 0; b < n; ++b)
      if (!seen[b]) {
        c.passed = false;
        c.witness = "map " + std::to_string(b + 1) + " not reachable from map 1";
        break;
      }
    rep.checks.push_back(c);
  }
  {
    ValidationReport::Check c{"symmetry", true, ""};
    std::set<std::pair<Rational, Rational>> corners;
    for (const auto& s : sq) corners.emplace(s.x, s.y);
    for (auto g : kSymmetries) {
      for (int i = 0; i < n && c.passed; ++i) {
        Square im = image_square(g, sq[i]);
        if (!corners.count({im.x, im.y})) {
          c.passed = false;
          c.witness = std::string(name(g)) + " sends map " + std::to_string(i + 1) + " to " +
                      point_str({im.x, im.y}) + ", not a cell";
        }
      }
      if (!c.passed) break;
    }
    rep.checks.push_back(c);
  }
  {
    ValidationReport::Check c{"boundary-included", true, ""};
    for (auto s : {Side::bottom, Side::right, Side::top, Side::left}) {
      if (auto gap = side_uncovered(sq, s)) {
        c.passed = false;
        c.witness = "side L" + std::to_string(static_cast<int>(s)) + ": " + *gap;
        break;
      }
    }
    rep.checks.push_back(c);
  }
  {
    ValidationReport::Check c{"boundary-numbering", true, ""};
    const auto ring = boundary_ring(k);
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const auto& m = spec.maps()[i];
      if (m.symmetry != Symmetry::id || m.tx != ring[i].tx || m.ty != ring[i].ty) {
        c.passed = false;
        c.witness = "map " + std::to_string(i + 1) + " should be translation to " +
                    point_str({ring[i].tx, ring[i].ty});
        break;
      }
    }
    rep.checks.push_back(c);
  }
  return rep;
}

void require_valid(const CarpetSpec& spec) {
  auto rep = validate(spec);
  for (const auto& c : rep.checks)
    if (!c.passed) throw ValidationError(c.name + ": " + c.witness);
}

Square cell_square(const CarpetSpec& spec, const Word& w) {
  std::array<Point, 2> box{Point{0, 0}, Point{1, 1}};
  for (int i = w.level() - 1; i >= 0; --i) {
    Point a = spec.apply(w[i], box[0]);
    Point b = spec.apply(w[i], box[1]);
    box = {Point{std::min(a.x, b.x), std::min(a.y, b.y)}, Point{std::max(a.x, b.x), std::max(a.y, b.y)}};
  }
  return {box[0].x, box[0].y, box[1].x - box[0].x};
}

Intersection cells_intersect(const CarpetSpec& spec, const Word& a, const Word& b) {
  Square s = cell_square(spec, a);
  Square t = cell_square(spec, b);
  Rational x0 = std::max(s.x, t.x), x1 = std::min(s.x + s.side, t.x + t.side);
  Rational y0 = std::max(s.y, t.y), y1 = std::min(s.y + s.side, t.y + t.side);
  Intersection r;
  if (x0 > x1 || y0 > y1) return r;
  if (x0 < x1 && y0 < y1) throw std::invalid_argument("cells overlap in their interiors");
  r.a = {x0, y0};
  r.b = {x1, y1};
  if (x0 == x1 && y0 == y1) {
    r.kind = Intersection::Kind::point;
  } else {
    r.kind = Intersection::Kind::segment;
    r.length = (x1 - x0) + (y1 - y0);
  }
  return r;
}

ContactConstant contact_constant(const CarpetSpec& spec) {
  const auto sq = level_one_squares(spec);
  std::optional<Rational> best_d2;
  bool axis = false;
  for (std::size_t i = 0; i < sq.size(); ++i)
    for (std::size_t j = i + 1; j < sq.size(); ++j) {
      const auto& s = sq[i];
      const auto& t = sq[j];
      Rational gx = std::max(Rational(0), abs(s.x - t.x) - s.side);
      Rational gy = std::max(Rational(0), abs(s.y - t.y) - s.side);
      if (gx == 0 && gy == 0) continue;
      Rational d2 = gx * gx + gy * gy;
      bool ax = gx == 0 || gy == 0;
      if (!best_d2 || d2 < *best_d2 || (d2 == *best_d2 && ax)) {
        best_d2 = d2;
        axis = ax;
      }
    }
  ContactConstant c;
  const Rational k2 = spec.k() * spec.k();
  if (!best_d2 || k2 * *best_d2 >= Rational(1, 4)) {
    c.c0_squared = Rational(1, 16);
    c.c0_exact = Rational(1, 4);
  } else {
    c.c0_squared = k2 * *best_d2 / 4;
    if (axis) {
      // d is one of the gaps; recover it exactly
      for (std::size_t i = 0; i < sq.size() && !c.c0_exact; ++i)
        for (std::size_t j = i + 1; j < sq.size(); ++j) {
          Rational gx = std::max(Rational(0), abs(sq[i].x - sq[j].x) - sq[i].side);
          Rational gy = std::max(Rational(0), abs(sq[i].y - sq[j].y) - sq[i].side);
          if ((gx == 0) != (gy == 0) && gx * gx + gy * gy == *best_d2) {
            c.c0_exact = Rational(spec.k()) * (gx + gy) / 2;
            break;
          }
        }
    }
  }
  c.c0 = c.c0_exact ? to_double(*c.c0_exact) : std::sqrt(to_double(c.c0_squared));
  return c;
}

std::vector<Word> boundary_words(const CarpetSpec& spec, int n, std::optional<Side> side) {
  auto cells = level_cells(spec, n);
  std::vector<Word> out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    bool hit = false;
    if (side) {
      hit = cells.touches(i, *side);
    } else {
      for (auto s : {Side::bottom, Side::right, Side::top, Side::left}) hit = hit || cells.touches(i, s);
    }
    if (hit) out.push_back(word_from_index(cells.words[i], n, spec.N()));
  }
  return out;
}

std::vector<Word> neighborhood(const CarpetSpec& spec, const Word& w, int radius) {
  const int n = w.level();
  auto cells = level_cells(spec, n);
  auto pairs = block_adjacency(cells);
  std::vector<std::vector<std::int32_t>> adj(cells.size());
  for (auto [a, b] : pairs) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<int> dist(cells.size(), -1);
  auto start = static_cast<std::int32_t>(word_index(w, spec.N()));
  dist[start] = 0;
  std::queue<std::int32_t> q;
  q.push(start);
  while (!q.empty()) {
    auto a = q.front();
    q.pop();
    if (dist[a] == radius) continue;
    for (auto b : adj[a])
      if (dist[b] < 0) {
        dist[b] = dist[a] + 1;
        q.push(b);
      }
  }
  std::vector<Word> out;
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (dist[i] >= 0) out.push_back(word_from_index(static_cast<std::int64_t>(i), n, spec.N()));
  return out;
}

Word symmetry_action(const CarpetSpec& spec, Symmetry g, const Word& w) {
  const auto sq = level_one_squares(spec);
  std::vector<int> out;
  Symmetry cur = g;
  for (int letter : w.letters()) {
    Square im = image_square(cur, sq[letter - 1]);
    int target = 0;
    for (int j = 0; j < spec.N(); ++j)
      if (sq[j].x == im.x && sq[j].y == im.y) target = j + 1;
    if (!target) throw ValidationError("spec is not symmetric under " + std::string(name(cur)));
    out.push_back(target);
    cur = compose(inverse(spec.map(target).symmetry), compose(cur, spec.map(letter).symmetry));
  }
  return Word(std::move(out));
}

std::vector<Similarity> boundary_ring(int k) {
  const std::array<Point, 5> q{Point{0, 0}, Point{1, 0}, Point{1, 1}, Point{0, 1}, Point{0, 0}};
  std::vector<Similarity> out;
  const Rational shrink = 1 - Rational(1, k);
  for (int j = 0; j < 4; ++j)
    for (int i = 1; i <= k - 1; ++i) {
      Rational f = Rational(i - 1, k);
      out.push_back({Symmetry::id, q[j].x * shrink + f * (q[j + 1].x - q[j].x),
                     q[j].y * shrink + f * (q[j + 1].y - q[j].y)});
    }
  return out;
}

CarpetSpec standard_carpet() { return CarpetSpec(3, boundary_ring(3)); }

}  // namespace usc
