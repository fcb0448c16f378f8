#include "usc/metric_lab.hpp"

#include "usc/cell_graph.hpp"
#include "usc/errors.hpp"
#include "usc/layout.hpp"
#include "usc/parallel.hpp"
#include "usc/poincare.hpp"
#include "usc/random.hpp"

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>

namespace usc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class RoundingGuard {
 public:
  explicit RoundingGuard(int mode) : old_(std::fegetround()) { std::fesetround(mode); }
  ~RoundingGuard() { std::fesetround(old_); }
  RoundingGuard(const RoundingGuard&) = delete;
  RoundingGuard& operator=(const RoundingGuard&) = delete;

 private:
  int old_;
};

// sqrt of a nonnegative rational, rounded up / down. The conversion to
// double is nearest-ish, so step two ulps outward first.
double sqrt_up(const Rational& q) {
  if (q == 0) return 0.0;
  double d = to_double(q);
  d = std::nextafter(std::nextafter(d, kInf), kInf);
  RoundingGuard g(FE_UPWARD);
  return std::sqrt(d);
}

double sqrt_down(const Rational& q) {
  if (q == 0) return 0.0;
  double d = to_double(q);
  d = std::nextafter(std::nextafter(d, 0.0), 0.0);
  RoundingGuard g(FE_DOWNWARD);
  return std::sqrt(std::max(d, 0.0));
}

double div_up(double a, double b) {
  RoundingGuard g(FE_UPWARD);
  return a / b;
}

std::int64_t floor_of(const Rational& r) {
  BigInt q = numerator(r) / denominator(r);
  if (r < 0 && q * denominator(r) != numerator(r)) q -= 1;
  return q.convert_to<std::int64_t>();
}

std::uint64_t bucket_key(std::int64_t bx, std::int64_t by) {
  return (static_cast<std::uint64_t>(bx) << 32) ^ static_cast<std::uint64_t>(by);
}

}  // namespace

CarpetSpec sliding_family_spec(const Rational& z) {
  if (z < 0 || z > Rational(1, 14)) throw SpecError("slide parameter z must lie in [0, 1/14]");
  const int k = 7;
  auto maps = boundary_ring(k);
  const Rational s(1, k);
  const Point base{z + Rational(2, 7), Rational(1, 7)};
  std::vector<Point> corners{base};
  for (auto g : kSymmetries) {
    if (g == Symmetry::id) continue;
    Point a = apply(g, base);
    Point b = apply(g, {base.x + s, base.y + s});
    Point ll{std::min(a.x, b.x), std::min(a.y, b.y)};
    if (std::find(corners.begin(), corners.end(), ll) == corners.end()) corners.push_back(ll);
  }
  for (const auto& c : corners) maps.push_back({Symmetry::id, c.x, c.y});
  return CarpetSpec(k, std::move(maps));
}

GeodesicMesh::GeodesicMesh(const CarpetSpec& spec, int m, int subdiv) : level_(m), k_(spec.k()) {
  if (m < 0 || subdiv < 0) throw std::invalid_argument("negative mesh level");
  auto cells = level_cells(spec, m);
  const std::int64_t f = checked_power(k_, subdiv);
  const std::int64_t per_square = 4 * f;
  if (static_cast<std::int64_t>(cells.size()) * per_square > kMaxCells) throw ResourceError("geodesic mesh too large");
  scale_ = cells.scale * f;
  side_ = cells.side * f;
  step_ = cells.side;
  error_bound_ = 4.0 / static_cast<double>(checked_power(k_, m));

  std::unordered_map<std::uint64_t, std::int32_t> index;
  auto vertex = [&](std::int64_t X, std::int64_t Y) {
    const auto key = static_cast<std::uint64_t>(X) * static_cast<std::uint64_t>(scale_ + 1) + static_cast<std::uint64_t>(Y);
    auto [it, fresh] = index.emplace(key, static_cast<std::int32_t>(vx_.size()));
    if (fresh) {
      vx_.push_back(X);
      vy_.push_back(Y);
    }
    return it->second;
  };
  sx_.resize(cells.size());
  sy_.resize(cells.size());
  for (std::size_t s = 0; s < cells.size(); ++s) {
    const std::int64_t x0 = cells.x[s] * f, y0 = cells.y[s] * f;
    sx_[s] = x0;
    sy_[s] = y0;
    buckets_[bucket_key(x0 / side_, y0 / side_)].push_back(static_cast<std::int32_t>(s));
    for (std::int64_t j = 0; j < f; ++j) {
      vertex(x0 + j * step_, y0);
      vertex(x0 + side_, y0 + j * step_);
      vertex(x0 + side_ - j * step_, y0 + side_);
      vertex(x0, y0 + side_ - j * step_);
    }
  }

  // every vertex joins every square it lies in, including points of a
  // neighbour that land mid-side
  square_vertices_.assign(cells.size(), {});
  vsq_offsets_.assign(vx_.size() + 1, 0);
  for (std::int32_t v = 0; v < vertex_count(); ++v) {
    auto in = squares_containing(vx_[v], vy_[v]);
    for (auto s : in) {
      square_vertices_[s].push_back(v);
      vsq_.push_back(s);
    }
    vsq_offsets_[v + 1] = static_cast<std::int64_t>(vsq_.size());
  }
  for (const auto& sv : square_vertices_) {
    const auto n = static_cast<std::int64_t>(sv.size());
    chords_ += n * (n - 1) / 2;
  }
}

std::vector<std::int32_t> GeodesicMesh::squares_containing(std::int64_t X, std::int64_t Y) const {
  std::vector<std::int32_t> out;
  const std::int64_t bx = X / side_, by = Y / side_;
  for (std::int64_t i = bx - 1; i <= bx; ++i)
    for (std::int64_t j = by - 1; j <= by; ++j) {
      if (i < 0 || j < 0) continue;
      auto it = buckets_.find(bucket_key(i, j));
      if (it == buckets_.end()) continue;
      for (auto s : it->second)
        if (sx_[s] <= X && X <= sx_[s] + side_ && sy_[s] <= Y && Y <= sy_[s] + side_) out.push_back(s);
    }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::int32_t> GeodesicMesh::squares_containing(const Point& p) const {
  const Rational X = p.x * scale_, Y = p.y * scale_;
  std::vector<std::int32_t> out;
  if (X < 0 || Y < 0) return out;
  const std::int64_t bx = floor_of(X / side_), by = floor_of(Y / side_);
  for (std::int64_t i = bx - 1; i <= bx; ++i)
    for (std::int64_t j = by - 1; j <= by; ++j) {
      if (i < 0 || j < 0) continue;
      auto it = buckets_.find(bucket_key(i, j));
      if (it == buckets_.end()) continue;
      for (auto s : it->second)
        if (X >= sx_[s] && X <= sx_[s] + side_ && Y >= sy_[s] && Y <= sy_[s] + side_) out.push_back(s);
    }
  std::sort(out.begin(), out.end());
  return out;
}

bool GeodesicMesh::in_union(const Point& p) const { return !squares_containing(p).empty(); }

std::vector<std::pair<std::int32_t, double>> GeodesicMesh::seeds(const Point& p) const {
  const Rational X = p.x * scale_, Y = p.y * scale_;
  std::vector<std::pair<std::int32_t, double>> out;
  for (auto s : squares_containing(p))
    for (auto v : square_vertices_[s]) {
      const Rational dx = X - vx_[v], dy = Y - vy_[v];
      out.emplace_back(v, sqrt_up(dx * dx + dy * dy));
    }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first == b.first; }),
            out.end());
  return out;
}

double GeodesicMesh::chord(std::int32_t a, std::int32_t b) const {
  const std::int64_t dx = vx_[a] - vx_[b], dy = vy_[a] - vy_[b];
  // caller holds FE_UPWARD
  return std::sqrt(static_cast<double>(dx * dx + dy * dy));
}

void GeodesicMesh::dijkstra(std::span<const std::pair<std::int32_t, double>> sources,
                            std::span<const std::int32_t> targets, std::vector<double>& dist,
                            std::vector<std::int32_t>& touched) const {
  RoundingGuard g(FE_UPWARD);
  thread_local std::vector<char> settled;
  if (dist.size() != vx_.size()) dist.assign(vx_.size(), kInf);
  if (settled.size() != vx_.size()) settled.assign(vx_.size(), 0);
  using Item = std::pair<double, std::int32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (auto [v, d] : sources) {
    if (d < dist[v]) {
      if (dist[v] == kInf) touched.push_back(v);
      dist[v] = d;
      pq.emplace(d, v);
    }
  }
  std::size_t remaining = 0;
  std::vector<std::int32_t> tg(targets.begin(), targets.end());
  std::sort(tg.begin(), tg.end());
  tg.erase(std::unique(tg.begin(), tg.end()), tg.end());
  remaining = tg.size();
  const bool bounded = !tg.empty();
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (settled[v]) continue;
    settled[v] = 1;
    if (bounded && std::binary_search(tg.begin(), tg.end(), v) && --remaining == 0) break;
    for (auto i = vsq_offsets_[v]; i < vsq_offsets_[v + 1]; ++i)
      for (auto u : square_vertices_[vsq_[i]]) {
        if (settled[u]) continue;
        const double nd = d + chord(v, u);
        if (nd < dist[u]) {
          if (dist[u] == kInf) touched.push_back(u);
          dist[u] = nd;
          pq.emplace(nd, u);
        }
      }
  }
  for (auto v : touched) settled[v] = 0;
}

std::vector<double> GeodesicMesh::distances_from(const Point& p) const {
  auto src = seeds(p);
  if (src.empty()) throw std::invalid_argument("point outside the square union");
  std::vector<double> dist;
  std::vector<std::int32_t> touched;
  dijkstra(src, {}, dist, touched);
  const double unit = static_cast<double>(scale_);
  for (auto& d : dist)
    if (d != kInf) d = div_up(d, unit);
  return dist;
}

double GeodesicMesh::distance(const Point& x, const Point& y) const {
  auto sxs = squares_containing(x), sys = squares_containing(y);
  if (sxs.empty() || sys.empty()) throw std::invalid_argument("point outside the square union");
  const Rational dx = (x.x - y.x) * scale_, dy = (x.y - y.y) * scale_;
  std::vector<std::int32_t> common;
  std::set_intersection(sxs.begin(), sxs.end(), sys.begin(), sys.end(), std::back_inserter(common));
  const double unit = static_cast<double>(scale_);
  if (!common.empty()) return div_up(sqrt_up(dx * dx + dy * dy), unit);
  auto src = seeds(x);
  auto dst = seeds(y);
  std::vector<std::int32_t> targets;
  for (auto [v, l] : dst) targets.push_back(v);
  std::vector<double> dist;
  std::vector<std::int32_t> touched;
  dijkstra(src, targets, dist, touched);
  double best = kInf;
  {
    RoundingGuard g(FE_UPWARD);
    for (auto [v, l] : dst) best = std::min(best, dist[v] + l);
  }
  return best == kInf ? kInf : div_up(best, unit);
}

GeodesicMesh::Modulus GeodesicMesh::modulus(double delta) const {
  const double spacing = static_cast<double>(step_) / static_cast<double>(scale_);
  if (!(delta > 4.0 * spacing)) throw std::invalid_argument("modulus scale must exceed 4 mesh spacings");
  const double D = delta * static_cast<double>(scale_);
  const auto B = static_cast<std::int64_t>(std::ceil(D));
  std::unordered_map<std::uint64_t, std::vector<std::int32_t>> grid;
  for (std::int32_t v = 0; v < vertex_count(); ++v) grid[bucket_key(vx_[v] / B, vy_[v] / B)].push_back(v);

  auto shares_square = [&](std::int32_t a, std::int32_t b) {
    for (auto i = vsq_offsets_[a]; i < vsq_offsets_[a + 1]; ++i)
      for (auto j = vsq_offsets_[b]; j < vsq_offsets_[b + 1]; ++j)
        if (vsq_[i] == vsq_[j]) return true;
    return false;
  };

  auto per_source = parallel_map<Modulus>(vx_.size(), [&](std::size_t ai) {
    const auto a = static_cast<std::int32_t>(ai);
    Modulus best;
    std::vector<std::int32_t> far;
    const std::int64_t bx = vx_[a] / B, by = vy_[a] / B;
    for (std::int64_t i = bx - 1; i <= bx + 1; ++i)
      for (std::int64_t j = by - 1; j <= by + 1; ++j) {
        if (i < 0 || j < 0) continue;
        auto it = grid.find(bucket_key(i, j));
        if (it == grid.end()) continue;
        for (auto b : it->second) {
          if (b <= a) continue;
          const double dx = static_cast<double>(vx_[a] - vx_[b]), dy = static_cast<double>(vy_[a] - vy_[b]);
          if (dx * dx + dy * dy >= D * D) continue;
          if (shares_square(a, b)) {
            RoundingGuard g(FE_UPWARD);
            const double c = chord(a, b);
            if (c > best.value || (c == best.value && b < best.b)) best = {c, a, b};
          } else {
            far.push_back(b);
          }
        }
      }
    if (!far.empty()) {
      thread_local std::vector<double> dist;
      thread_local std::vector<std::int32_t> touched;
      const std::pair<std::int32_t, double> src[1] = {{a, 0.0}};
      dijkstra(src, far, dist, touched);
      std::sort(far.begin(), far.end());
      for (auto b : far)
        if (dist[b] > best.value || (dist[b] == best.value && b < best.b)) best = {dist[b], a, b};
      for (auto v : touched) dist[v] = kInf;
      touched.clear();
    }
    return best;
  });
  Modulus out;
  for (const auto& m : per_source)
    if (m.a >= 0 && m.value > out.value) out = m;
  if (out.a >= 0) out.value = div_up(out.value, static_cast<double>(scale_));
  return out;
}

GeodesicValue geodesic_distance(const CarpetSpec& spec, const Point& x, const Point& y, int m) {
  GeodesicMesh mesh(spec, m, 1);
  return {mesh.distance(x, y), mesh.error_bound()};
}

double euclidean_lower(const Point& x, const Point& y) {
  const Rational dx = x.x - y.x, dy = x.y - y.y;
  return sqrt_down(dx * dx + dy * dy);
}

double equicontinuity_modulus(const CarpetSpec& spec, double delta, int m, int subdiv) {
  return GeodesicMesh(spec, m, subdiv).modulus(delta).value;
}

ResistanceProbe::ResistanceProbe(const CarpetSpec& spec, int m, const SolverOptions& opt)
    : graph_(build_graph(spec, m)), lap_(laplacian(*graph_)), opt_(opt) {
  cross_ = cross_resistance(*graph_, lap_, opt_).value();
}

std::vector<std::int32_t> ResistanceProbe::cells_at(const Point& p) const {
  const auto& c = graph_->cells();
  const Rational X = p.x * c.scale, Y = p.y * c.scale;
  std::vector<std::int32_t> out;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (X >= c.x[i] && X <= c.x[i] + c.side && Y >= c.y[i] && Y <= c.y[i] + c.side)
      out.push_back(static_cast<std::int32_t>(i));
  return out;
}

double ResistanceProbe::resistance(const Point& x, const Point& y) const {
  auto a = cells_at(x), b = cells_at(y);
  if (a.empty() || b.empty()) throw std::invalid_argument("point outside the level-m cells");
  std::vector<std::int32_t> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  if (!common.empty()) throw std::invalid_argument("points share a cell; refine the level");
  return effective_resistance(lap_, a, b, opt_);
}

double resistance_metric(const CarpetSpec& spec, const Point& x, const Point& y, int m, const SolverOptions& opt) {
  return ResistanceProbe(spec, m, opt).normalized(x, y);
}

ThetaPair theta_pair(const CarpetSpec&, const ResistanceProbe& probe, const GeodesicMesh& mesh, const Point& x,
                     const Point& y, double theta) {
  ThetaPair p;
  p.x = x;
  p.y = y;
  p.euclid = euclidean_lower(x, y);
  p.geodesic = mesh.distance(x, y);
  p.resistance = probe.normalized(x, y);
  p.ratio = p.resistance / std::pow(p.geodesic, theta);
  return p;
}

ThetaScan theta_ratio_scan(const CarpetSpec& spec, int pair_count, int m, double r_hat, std::uint64_t seed,
                           const SolverOptions& opt) {
  if (!(r_hat > 0.0 && r_hat < 1.0)) throw std::invalid_argument("r_hat must lie in (0, 1)");
  if (pair_count <= 0) throw std::invalid_argument("pair count must be positive");
  ThetaScan scan;
  scan.level = m;
  scan.r_hat = r_hat;
  scan.theta = -std::log(r_hat) / std::log(static_cast<double>(spec.k()));
  const double guard = 4.0 / static_cast<double>(checked_power(spec.k(), m));

  ResistanceProbe probe(spec, m, opt);
  GeodesicMesh mesh(spec, m, 1);
  auto cells = level_cells(spec, m);
  const std::int64_t S = cells.scale, side = cells.side;
  std::vector<std::pair<std::int64_t, std::int64_t>> corners;
  for (std::size_t i = 0; i < cells.size(); ++i)
    for (int c = 0; c < 4; ++c) corners.emplace_back(cells.x[i] + (c & 1) * side, cells.y[i] + (c >> 1) * side);
  std::sort(corners.begin(), corners.end());
  corners.erase(std::unique(corners.begin(), corners.end()), corners.end());

  int bands = 0;
  while (std::ldexp(1.0, -(bands + 1)) >= guard) ++bands;
  if (bands == 0) throw std::invalid_argument("level too coarse for the distance guard");

  // pair i: band i mod bands, first corner uniform, second uniform among
  // corners in [2^-(b+1), 2^-b)
  std::vector<std::optional<std::pair<Point, Point>>> chosen(pair_count);
  for (int i = 0; i < pair_count; ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i));
    const int b = i % bands;
    const auto [x0, y0] = corners[rng.below(corners.size())];
    std::vector<std::size_t> cand;
    const __int128 S2 = static_cast<__int128>(S) * S;
    for (std::size_t j = 0; j < corners.size(); ++j) {
      const __int128 dx = corners[j].first - x0, dy = corners[j].second - y0;
      const __int128 d2 = dx * dx + dy * dy;
      if ((d2 << (2 * (b + 1))) >= S2 && (d2 << (2 * b)) < S2) cand.push_back(j);
    }
    if (cand.empty()) continue;
    const auto [x1, y1] = corners[cand[rng.below(cand.size())]];
    chosen[i] = std::pair(Point{Rational(x0, S), Rational(y0, S)}, Point{Rational(x1, S), Rational(y1, S)});
  }

  auto results = parallel_map<std::optional<ThetaPair>>(pair_count, [&](std::size_t i) -> std::optional<ThetaPair> {
    if (!chosen[i]) return std::nullopt;
    auto p = theta_pair(spec, probe, mesh, chosen[i]->first, chosen[i]->second, scan.theta);
    if (p.geodesic < guard) return std::nullopt;
    return p;
  });
  bool first = true;
  for (auto& r : results) {
    if (!r) {
      ++scan.excluded;
      continue;
    }
    scan.min_ratio = first ? r->ratio : std::min(scan.min_ratio, r->ratio);
    scan.max_ratio = first ? r->ratio : std::max(scan.max_ratio, r->ratio);
    first = false;
    scan.pairs.push_back(std::move(*r));
  }
  return scan;
}

std::vector<std::pair<Point, Point>> slide_probes() {
  const Point q1{Rational(0), Rational(0)}, q2{Rational(1), Rational(0)};
  const Point p3{Rational(3, 7), Rational(6, 49)}, p4{Rational(6, 49), Rational(3, 7)};
  return {{q1, q2}, {p3, p4}, {q1, p3}};
}

SlideSample slide_sample(const Rational& z, const SlideOptions& opt) {
  if (opt.m < 2) throw std::invalid_argument("slide sample needs m >= 2");
  auto spec = sliding_family_spec(z);
  require_valid(spec);
  SlideSample s;
  s.z = z;
  ResistanceProbe fine(spec, opt.m, opt.solver), coarse(spec, opt.m - 1, opt.solver);
  s.cross = fine.cross();
  s.cross_prev = coarse.cross();
  s.r_hat = s.cross_prev / s.cross;
  for (const auto& [x, y] : slide_probes()) {
    const double v = fine.normalized(x, y);
    s.probe.push_back(v);
    s.probe_err.push_back(std::abs(v - coarse.normalized(x, y)));
  }
  if (opt.with_modulus) s.modulus = GeodesicMesh(spec, opt.mesh_level, opt.mesh_subdiv).modulus(opt.delta).value;
  return s;
}

std::vector<SlideSample> sliding_scan(std::span<const Rational> grid, const SlideOptions& opt) {
  for (const auto& z : grid)
    if (z < 0 || z > Rational(1, 14)) throw SpecError("slide parameter z must lie in [0, 1/14]");
  return parallel_map<SlideSample>(grid.size(), [&](std::size_t i) { return slide_sample(grid[i], opt); });
}

ContinuityCheck interior_continuity(std::span<const SlideSample> samples) {
  ContinuityCheck c;
  if (samples.size() < 2) return c;
  std::vector<double> slopes;
  for (std::size_t j = 0; j + 1 < samples.size(); ++j) {
    const double dz = std::abs(to_double(samples[j + 1].z - samples[j].z));
    for (std::size_t i = 0; i < samples[j].probe.size(); ++i)
      slopes.push_back(std::abs(samples[j + 1].probe[i] - samples[j].probe[i]) / dz);
  }
  std::nth_element(slopes.begin(), slopes.begin() + slopes.size() / 2, slopes.end());
  c.lipschitz = 3.0 * slopes[slopes.size() / 2];
  for (std::size_t j = 0; j + 1 < samples.size(); ++j) {
    const double dz = std::abs(to_double(samples[j + 1].z - samples[j].z));
    for (std::size_t i = 0; i < samples[j].probe.size(); ++i) {
      const double err = std::max(samples[j].probe_err[i], samples[j + 1].probe_err[i]);
      ++c.comparisons;
      if (std::abs(samples[j + 1].probe[i] - samples[j].probe[i]) > c.lipschitz * dz + 2.0 * err) ++c.violations;
    }
  }
  return c;
}

double family_modulus(const Rational& z0, const Rational& step, int terms, const SlideOptions& opt) {
  const Rational hi(1, 14);
  std::vector<Rational> zs{z0};
  Rational off = step;
  for (int j = 0; j < terms; ++j, off /= 2) zs.push_back(z0 + off <= hi ? z0 + off : z0 - off);
  auto mods = parallel_map<double>(zs.size(), [&](std::size_t i) {
    auto spec = sliding_family_spec(zs[i]);
    return GeodesicMesh(spec, opt.mesh_level, opt.mesh_subdiv).modulus(opt.delta).value;
  });
  return *std::max_element(mods.begin(), mods.end());
}

}  // namespace usc
