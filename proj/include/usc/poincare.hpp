#pragma once

#include "usc/cell_graph.hpp"
#include "usc/form_solver.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace usc {

// Poincare constant on W_n: 1 / spectral gap of the level-n graph.
double lambda_n(const CarpetSpec& spec, int n, const SolverOptions& opt = {});

struct CrossResistance {
  double horizontal = 0.0;  // W_{n,2} to W_{n,4}
  double vertical = 0.0;    // W_{n,1} to W_{n,3}
  double value() const { return horizontal; }
};

// Throws std::logic_error when the two directions disagree beyond 1e-8
// relative (they coincide for every valid spec by the d1 symmetry).
CrossResistance cross_resistance(const CarpetSpec& spec, int n, const SolverOptions& opt = {});
CrossResistance cross_resistance(const CellGraph& g, const SparseForm& L, const SolverOptions& opt = {});

// Pair subproblem on {w, w'} . W_m: sup N^m (mean_w f - mean_w' f)^2 / D(f).
struct PairProblem {
  GraphPtr graph;
  SparseForm laplacian;
  std::vector<double> functional;  // +-1/N^m on the two blocks
  double weight = 1.0;             // N^m
};

PairProblem pair_problem(const CarpetSpec& spec, const Word& w, const Word& w2, int m);
double sigma_pair(const CarpetSpec& spec, const Word& w, const Word& w2, int m, const SolverOptions& opt = {});
double sigma_pair(const PairProblem& p, const SolverOptions& opt = {});

// Largest quotient over random test functions, divided by the computed
// sigma. Half the trials are Gaussian, half perturb the maximiser.
struct SigmaCertificate {
  double sigma = 0.0;
  double max_ratio = 0.0;
  int trials = 0;
};
SigmaCertificate sigma_certificate(const PairProblem& p, int trials, std::uint64_t seed,
                                   const SolverOptions& opt = {});

// Contact class: offset of w' relative to w in cell-side units, reduced
// under the symmetry group.
struct ContactClass {
  int level = 0;  // first level where it shows up
  Word w, w2;     // representative pair
  Rational dx, dy;
  bool point_contact = false;
  double sigma = 0.0;
};

struct SigmaEstimate {
  int m = 0;
  double value = 0.0;  // lower bound of the true sup
  std::vector<ContactClass> classes;
  std::vector<int> new_classes_per_level;
};

SigmaEstimate sigma_estimate(const CarpetSpec& spec, int m, int base_level_cap = 2, const SolverOptions& opt = {});

// R_{|w|+m}(w . W_m, (W_|w| \ N_w) . W_m) on the full level graph.
double R_hat(const CarpetSpec& spec, const Word& w, int m, const SolverOptions& opt = {});

struct RSample {
  int m = 0;
  double value = 0.0;  // min over the sample: an upper bound of the true inf
  Word argmin;
  int evaluated = 0;   // symmetry orbits solved
};

RSample sampled_R_m(const CarpetSpec& spec, int m, std::span<const int> word_levels = {},
                    const SolverOptions& opt = {});

struct LevelConstants {
  int n = 0;
  double lambda = 0.0;
  double cross = 0.0;
  double r_lambda = 0.0;  // N lambda_n / lambda_{n+1}, 0 on the last level
  double r_cross = 0.0;   // cross_n / cross_{n+1}
};

struct RenormEstimate {
  int k = 0, N = 0, n_max = 0;
  double r_hat = 0.0;     // geometric mean of the two final estimators
  double r_lambda = 0.0;  // at n_max
  double r_cross = 0.0;
  double theta = 0.0;     // -log r / log k
  double sigma = 0.0;     // -log r / (2 log k) + 1/2
  double d_H = 0.0;
  double d_W = 0.0;
  double disagreement = 0.0;  // |r_lambda - r_cross| / min
  double spread = 0.0;        // max / min over all estimator values at the last two levels
  bool valid = false;         // 2/k <= r_hat <= N/k^2
  bool warning = false;       // disagreement > 10%
  std::vector<LevelConstants> levels;  // n = 1 .. n_max + 1
};

RenormEstimate renorm_factor(const CarpetSpec& spec, int n_max, const SolverOptions& opt = {});

struct PartitionOfUnity {
  int n = 0, m = 0;
  GraphPtr graph;                  // level n + m
  std::vector<CellFunction> psi;   // indexed by word index on W_n
  std::vector<double> energies;
  double max_energy = 0.0;
  double sum_deviation = 0.0;      // max |sum psi - 1|
  double min_value = 0.0;
  double min_phi_sum = 0.0;        // Phi >= 1
  bool support_exact = true;
};

PartitionOfUnity partition_of_unity(const CarpetSpec& spec, int n, int m, const SolverOptions& opt = {});

// max_w |f(w) - [f]|^2 / (N^-n lambda_n D_n(f)).
double smoothing_ratio(const CellFunction& f, double lambda);

struct SmoothingReport {
  int n = 0;
  double lambda = 0.0;
  double max_ratio = 0.0;     // empirical C over every test function
  double random_max = 0.0;    // Gaussian trials only
  double extremal_max = 0.0;  // per-cell maximisers L^+(e_w - mean)
  int trials = 0;
};

SmoothingReport smoothing_bound_check(const CarpetSpec& spec, int n, int trials, std::uint64_t seed,
                                      const SolverOptions& opt = {});

// Two-sided scaling between levels: left = lambda_n N^m R_m / lambda_{n+m},
// right = lambda_{n+m} / (lambda_n sigma_m).
struct ScalingRow {
  int n = 0, m = 0;
  double left = 0.0, right = 0.0;
};

struct ScalingCheck {
  std::vector<ScalingRow> rows;
  double C_left = 0.0, C_right = 0.0;
};

ScalingCheck scaling_inequalities(const CarpetSpec& spec, std::span<const int> ns, std::span<const int> ms,
                                  const SolverOptions& opt = {});

}  // namespace usc
