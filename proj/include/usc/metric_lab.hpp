#pragma once

#include "usc/form_solver.hpp"
#include "usc/geometry.hpp"

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace usc {

// k = 7, N = 32: the boundary ring plus the orbit of one interior square
// with lower-left corner (z + 2/7, 1/7), z in [0, 1/14].
CarpetSpec sliding_family_spec(const Rational& z);

// Geodesic distance inside the union of level-m squares, approximated
// on a mesh of square corners and edge points spaced k^-(m+subdiv)
// apart, all pairs on one square joined by straight chords. Lengths are
// summed with upward rounding, so mesh values never undercut the true
// chord-path length.
class GeodesicMesh {
 public:
  GeodesicMesh(const CarpetSpec& spec, int m, int subdiv = 1);

  int level() const { return level_; }
  std::int64_t scale() const { return scale_; }  // lattice units per unit length
  std::int32_t vertex_count() const { return static_cast<std::int32_t>(vx_.size()); }
  std::int64_t edge_count() const { return chords_; }
  std::int64_t vertex_x(std::int32_t v) const { return vx_[v]; }
  std::int64_t vertex_y(std::int32_t v) const { return vy_[v]; }
  double error_bound() const { return error_bound_; }

  // Shortest chord-path lengths from p to every mesh vertex.
  std::vector<double> distances_from(const Point& p) const;
  // Shortest chord-path length between two points of the union.
  double distance(const Point& x, const Point& y) const;
  // Largest mesh distance over vertex pairs with Euclidean distance < delta.
  struct Modulus {
    double value = 0.0;
    std::int32_t a = -1, b = -1;
  };
  Modulus modulus(double delta) const;

  bool in_union(const Point& p) const;

 private:
  std::vector<std::int32_t> squares_containing(const Point& p) const;
  std::vector<std::int32_t> squares_containing(std::int64_t X, std::int64_t Y) const;
  // mesh vertices visible from p, with upward-rounded lattice lengths
  std::vector<std::pair<std::int32_t, double>> seeds(const Point& p) const;
  double chord(std::int32_t a, std::int32_t b) const;  // lattice units, rounded up
  // Dijkstra in lattice units; stops once every target is settled
  void dijkstra(std::span<const std::pair<std::int32_t, double>> sources, std::span<const std::int32_t> targets,
                std::vector<double>& dist, std::vector<std::int32_t>& touched) const;

  int level_;
  int k_;
  std::int64_t scale_, side_, step_;
  double error_bound_;
  std::vector<std::int64_t> sx_, sy_;  // square corners
  std::vector<std::vector<std::int32_t>> square_vertices_;
  std::vector<std::int64_t> vx_, vy_;
  std::vector<std::int64_t> vsq_offsets_;  // vertex -> squares containing it
  std::vector<std::int32_t> vsq_;
  std::unordered_map<std::uint64_t, std::vector<std::int32_t>> buckets_;  // squares by lower-left / side
  std::int64_t chords_ = 0;
};

struct GeodesicValue {
  double value = 0.0;
  double error_bound = 0.0;  // 4 k^-m
};

GeodesicValue geodesic_distance(const CarpetSpec& spec, const Point& x, const Point& y, int m);

// |x - y| rounded downward.
double euclidean_lower(const Point& x, const Point& y);

// sup of mesh geodesic distance over mesh-vertex pairs closer than delta.
// Requires delta > 4 k^-(m + subdiv), the mesh spacing guard.
double equicontinuity_modulus(const CarpetSpec& spec, double delta, int m, int subdiv = 1);

// Normalized resistance R_m(cells at x, cells at y) / R_m(L1, L3) on one
// level-m graph; builds the Laplacian once.
class ResistanceProbe {
 public:
  ResistanceProbe(const CarpetSpec& spec, int m, const SolverOptions& opt = {});
  double cross() const { return cross_; }
  double resistance(const Point& x, const Point& y) const;  // unnormalized
  double normalized(const Point& x, const Point& y) const { return resistance(x, y) / cross_; }
  std::vector<std::int32_t> cells_at(const Point& p) const;

 private:
  GraphPtr graph_;
  SparseForm lap_;
  SolverOptions opt_;
  double cross_;
};

double resistance_metric(const CarpetSpec& spec, const Point& x, const Point& y, int m,
                         const SolverOptions& opt = {});

struct ThetaPair {
  Point x, y;
  double euclid = 0.0;
  double geodesic = 0.0;
  double resistance = 0.0;  // normalized
  double ratio = 0.0;       // resistance / geodesic^theta
};

struct ThetaScan {
  int level = 0;
  double r_hat = 0.0;
  double theta = 0.0;
  std::vector<ThetaPair> pairs;
  int excluded = 0;  // pairs dropped by the degenerate-distance guard
  double min_ratio = 0.0, max_ratio = 0.0;
  double spread() const { return max_ratio / min_ratio; }
};

// theta = -log(r_hat) / log(k). Pairs are level-m cell corners spread over
// dyadic distance bands.
ThetaScan theta_ratio_scan(const CarpetSpec& spec, int pair_count, int m, double r_hat, std::uint64_t seed,
                           const SolverOptions& opt = {});
ThetaPair theta_pair(const CarpetSpec& spec, const ResistanceProbe& probe, const GeodesicMesh& mesh,
                     const Point& x, const Point& y, double theta);

struct SlideOptions {
  int m = 3;               // resistance level
  double delta = 0.01;     // modulus scale
  int mesh_level = 1;      // geodesic mesh for the modulus
  int mesh_subdiv = 3;
  bool with_modulus = true;
  SolverOptions solver;
};

struct SlideSample {
  Rational z;
  double cross = 0.0;       // R_m(L1, L3)
  double cross_prev = 0.0;  // R_{m-1}(L1, L3)
  double r_hat = 0.0;       // cross_prev / cross
  std::vector<double> probe;      // normalized probe resistances at level m
  std::vector<double> probe_err;  // |level m - level m-1|
  double modulus = 0.0;
};

// Fixed probe pairs, all in K for every z.
std::vector<std::pair<Point, Point>> slide_probes();
SlideSample slide_sample(const Rational& z, const SlideOptions& opt);
std::vector<SlideSample> sliding_scan(std::span<const Rational> grid, const SlideOptions& opt);

struct ContinuityCheck {
  double lipschitz = 0.0;  // robust slope fit
  int comparisons = 0;
  int violations = 0;
  bool holds() const { return violations == 0; }
};

// Adjacent grid points: |R(z1) - R(z2)| <= L |z1 - z2| + 2 err, for every probe.
ContinuityCheck interior_continuity(std::span<const SlideSample> samples);

// Family modulus: sup of the single-spec modulus over z0 and a sequence
// z_j -> z0 inside [0, 1/14] (j = 0..terms-1, offsets step / 2^j).
double family_modulus(const Rational& z0, const Rational& step, int terms, const SlideOptions& opt);

}  // namespace usc
