#pragma once

#include "usc/form_solver.hpp"
#include "usc/geometry.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace usc {

// Squared seminorm sum_{m<=M} r^-m sum_l (u(l/k^m) - u((l+1)/k^m))^2 from
// samples at l/k^M, l = 0..k^M.
double besov_seminorm_unit(std::span<const double> samples, int k, double r);

// Same sum with u evaluated on the fly; level m costs k^m calls, so depth
// 20 with k = 3 is a few seconds. Kahan summation inside each level.
template <class F>
double besov_seminorm_unit(F&& u, int k, int M, double r) {
  double total = 0.0;
  double weight = 1.0;
  for (int m = 0; m <= M; ++m) {
    std::int64_t count = 1;
    for (int i = 0; i < m; ++i) count *= k;
    const double h = 1.0 / static_cast<double>(count);
    double s = 0.0, c = 0.0;
    double prev = u(0.0);
    for (std::int64_t l = 1; l <= count; ++l) {
      const double cur = u(l == count ? 1.0 : static_cast<double>(l) * h);
      const double d = cur - prev;
      const double y = d * d - c;
      const double t = s + y;
      c = (t - s) - y;
      s = t;
      prev = cur;
    }
    total += weight * s;
    weight /= r;
  }
  return total;
}

using PlaneFunction = std::function<double(double, double)>;

// Boundary data on the level-n cell skeleton, sampled at the k-adic points
// of every cell side down to depth M. Shared points are stored once.
class BoundaryFunction {
 public:
  BoundaryFunction(const CarpetSpec& spec, int n, int depth, const PlaneFunction& u);

  int level() const { return n_; }
  int depth() const { return depth_; }
  int k() const { return k_; }
  std::int64_t point_count() const { return static_cast<std::int64_t>(values_.size()); }
  std::int64_t side_count() const { return static_cast<std::int64_t>(sides_.size()); }
  // samples along one cell side, k^depth + 1 entries
  std::vector<double> side_samples(std::int64_t side) const;
  double value_at(std::int64_t X, std::int64_t Y) const;  // lattice point
  std::int64_t unit() const { return unit_; }             // lattice steps per unit length
  std::int64_t spacing() const { return spacing_; }

 private:
  int n_, depth_, k_;
  std::int64_t unit_ = 1, spacing_ = 1;
  std::vector<double> values_;
  std::unordered_map<std::uint64_t, std::int64_t> index_;
  struct SideRef {
    std::int64_t x0, y0;
    int dx, dy;
  };
  std::vector<SideRef> sides_;
  std::uint64_t key(std::int64_t X, std::int64_t Y) const;
};

// r^-n times the sum of unit seminorms over all 4 N^n cell sides.
double besov_seminorm_boundary(const BoundaryFunction& u, double r);

// Truncated bottom boundary graph: bricks of levels 0..depth-1, vertices
// (l / k^m, 1 / k^{m+1}) for m = 0..depth.
struct BoundaryGraph {
  struct Vertex {
    int m;
    std::int64_t l;
  };
  struct Edge {
    std::int32_t a, b;
    int level;  // brick level: weight r^-level
  };
  int k = 0;
  int depth = 0;
  std::vector<Vertex> vertices;
  std::vector<Edge> edges;
  std::int32_t vertex(int m, std::int64_t l) const;
  double x(std::int32_t v) const;
  double y(std::int32_t v) const;
};

BoundaryGraph boundary_graph(int k, int depth);
BoundaryGraph boundary_graph(const CarpetSpec& spec, int depth);
std::int64_t boundary_graph_vertex_count(int k, int depth);  // sum_m (k^m + 1)

double boundary_graph_energy(const BoundaryGraph& g, std::span<const double> f, double r);
double boundary_graph_energy(const BoundaryGraph& g, const PlaneFunction& f, double r);

// Bottom-side data, D_n and the brick sums D~_m from depth-limited samples.
struct TraceBoundReport {
  int n = 0, depth = 0;
  double lhs = 0.0;        // D_n(f on L1)
  double brick_sum = 0.0;  // 3 sum_{m=n}^{depth-1} D~_m
  double tail = 0.0;       // norm of increments of f(., 0) - f(., k^-(depth+1))
  double identity_error = 0.0;
  bool holds() const { return lhs <= brick_sum + tail + 1e-12 * (1.0 + lhs); }
};

TraceBoundReport trace_bound_check(const PlaneFunction& f, int k, int n, int depth);

struct TraceTrial {
  int id = 0;
  std::string label;
  double seminorm2 = 0.0;
  double energy = 0.0;  // D_m(h) * cross resistance at level m
  double ratio = 0.0;
};

struct TraceReport {
  int n = 0, m = 0;
  double r_hat = 0.0;
  std::vector<TraceTrial> trials;
  double min_ratio = 0.0, max_ratio = 0.0;
  int excluded = 0;  // constant data
  double spread() const { return max_ratio / min_ratio; }
};

// Random boundary datum: sum over levels j < J of hat functions on the
// k^-j grid with N(0,1) k^{-alpha j} weights.
PlaneFunction multiresolution_datum(int k, int levels, double alpha, std::uint64_t seed, std::uint64_t stream);

struct TraceDatum {
  std::string label;
  PlaneFunction u;
};

// x1, x2, four cone bumps at the side midpoints, then `trials` random data.
std::vector<TraceDatum> trace_data(int k, int trials, std::uint64_t seed);

TraceReport trace_ratio_experiment(const CarpetSpec& spec, int n, int m, double r_hat, int trials,
                                   std::uint64_t seed, const SolverOptions& opt = {});

}  // namespace usc
