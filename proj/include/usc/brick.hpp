#pragma once

#include "usc/cell_graph.hpp"
#include "usc/form_solver.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace usc {

// Lower-wall word sets, by exact square containment.
struct WallSets {
  int m = 0, n = 0;
  std::vector<std::int64_t> T;  // cells inside the level-m bottom wall
  std::vector<std::int64_t> B;  // cells inside the first brick (n >= 2, else empty)
};

WallSets wall_sets(const CarpetSpec& spec, int m, int n);

// Rebuilds the level-n bottom wall from scaled bricks plus the level-n
// bottom row and compares with the direct containment scan.
bool wall_decomposition_holds(const CarpetSpec& spec, int n);

struct BrickFunction {
  int n = 0;
  std::vector<std::int64_t> words;  // brick cells, ascending
  std::vector<double> values;
  std::vector<double> b1, b2;       // h_n(i.w) h'_{n-1}(w) and h_{n-1}(w)(1 - h'_{n-1}(w))
  double energy = 0.0;              // on brick edges only
  double energy_h = 0.0, energy_h_prev = 0.0, energy_hp_prev = 0.0;
  double err_sides = 0.0;           // 0 on the left, 1 on the right
  double err_top = 0.0;             // equals h_n on the top layer
  double err_annulus = 0.0;         // (i-1)/k + h_{n-1}(w)/k next to the wall
  double value(std::int64_t word) const;
  double bound_ratio() const { return energy / (energy_h + energy_h_prev + energy_hp_prev); }
};

struct LinearBoundary {
  int n = 0;
  CellFunction f;           // boundary values of x on the cell boundary
  double energy = 0.0;
  double bound_sum = 0.0;   // k^-n + sum_l k^-l D_{n-l}(h_{n-l})
  double boundary_error = 0.0;
  double mirror_error = 0.0;  // |f o v - f|
};

struct Separator {
  Word w;
  int n = 0;
  double c1 = 0.0, c2 = 0.0;
  CellFunction g;         // clamped
  double energy = 0.0;
  double energy_min = 0.0;  // energy of the unclamped minimum
  bool plateau_one = false;
  bool plateau_zero = false;
};

// Memoises the harmonic ingredients so bricks at several levels share
// their solves.
class ExtensionBuilder {
 public:
  explicit ExtensionBuilder(CarpetSpec spec, SolverOptions opt = {});

  const CarpetSpec& spec() const { return spec_; }
  const GraphPtr& graph(int n);
  const CellFunction& h(int n);        // 0 on the left side, 1 on the right
  const CellFunction& h_prime(int n);  // 1 on the top side, 0 next to the bottom wall
  const BrickFunction& brick(int n);
  const LinearBoundary& linear(int n);
  Separator separator(const Word& w, int n);

 private:
  CarpetSpec spec_;
  SolverOptions opt_;
  std::map<int, GraphPtr> graphs_;
  std::map<int, CellFunction> h_, hp_;
  std::map<int, BrickFunction> bricks_;
  std::map<int, LinearBoundary> linear_;
};

CellFunction cross_minimizer(const CarpetSpec& spec, int n, const SolverOptions& opt = {});
CellFunction annulus_minimizer(const CarpetSpec& spec, int n, const SolverOptions& opt = {});
BrickFunction brick_function(const CarpetSpec& spec, int n, const SolverOptions& opt = {});
LinearBoundary linear_boundary_function(const CarpetSpec& spec, int n, const SolverOptions& opt = {});
Separator separator_function(const CarpetSpec& spec, const Word& w, int n, const SolverOptions& opt = {});

// Resistance across a straight chain of l bottom-row cells, blown up by W_n.
double chain_resistance(const CarpetSpec& spec, int n, int l, const SolverOptions& opt = {});

}  // namespace usc
