#pragma once

#include "usc/cell_graph.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace usc {

struct SolverOptions {
  double cg_tol = 1e-10;      // relative residual
  double cg_max_mult = 5.0;   // iteration cap = mult * dimension
  double lanczos_tol = 1e-8;  // relative Ritz residual
};

// Symmetric matrix in CSR form. For a graph Laplacian the constants on
// each connected component span the kernel.
class SparseForm {
 public:
  SparseForm(std::int32_t dim, std::vector<std::int64_t> row_ptr, std::vector<std::int32_t> cols,
             std::vector<double> vals);

  std::int32_t dimension() const { return dim_; }
  std::span<const std::int32_t> row_cols(std::int32_t i) const {
    return {cols_.data() + row_ptr_[i], cols_.data() + row_ptr_[i + 1]};
  }
  std::span<const double> row_vals(std::int32_t i) const {
    return {vals_.data() + row_ptr_[i], vals_.data() + row_ptr_[i + 1]};
  }
  double diagonal(std::int32_t i) const { return diag_[i]; }
  double entry(std::int32_t i, std::int32_t j) const;
  std::int64_t nonzeros() const { return static_cast<std::int64_t>(cols_.size()); }

  void multiply(std::span<const double> x, std::span<double> y) const;
  // Sum over i < j of -a_ij (f_i - f_j)^2; equals f^T A f for Laplacians.
  double quadratic(std::span<const double> f) const;

  // Connected components of the off-diagonal pattern.
  const std::vector<std::int32_t>& component() const { return comp_; }
  std::int32_t component_count() const { return ncomp_; }

 private:
  std::int32_t dim_;
  std::vector<std::int64_t> row_ptr_;
  std::vector<std::int32_t> cols_;
  std::vector<double> vals_;
  std::vector<double> diag_;
  std::vector<std::int32_t> comp_;
  std::int32_t ncomp_ = 0;
};

SparseForm laplacian(const CellGraph& g);

struct SolveReport {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = true;
  // Free components with no constrained neighbour; their values are 0.
  int untouched_components = 0;
};

struct DirichletConstraint {
  std::vector<std::int32_t> vertices;
  double value = 0.0;
};

struct DirichletResult {
  std::vector<double> values;
  SolveReport report;
};

DirichletResult solve_dirichlet(const SparseForm& L, std::span<const DirichletConstraint> constraints,
                                const SolverOptions& opt = {});

double effective_resistance(const SparseForm& L, std::span<const std::int32_t> a,
                            std::span<const std::int32_t> b, const SolverOptions& opt = {});

struct SpectralGap {
  double gap = 0.0;     // smallest nonzero eigenvalue
  double lambda = 0.0;  // 1 / gap
  int lanczos_steps = 0;
};

// `start` optionally seeds the Lanczos vector (e.g. a coordinate function).
SpectralGap spectral_gap(const SparseForm& L, const SolverOptions& opt = {},
                         std::span<const double> start = {});

// sup a(f)^2 / f^T L f over non-constant f; a must annihilate constants.
double quadratic_sup(const SparseForm& L, std::span<const double> functional,
                     const SolverOptions& opt = {});

// Schur complement onto the kept vertices (in the given order).
SparseForm trace_form(const SparseForm& L, std::span<const std::int32_t> kept,
                      const SolverOptions& opt = {});

// L^+ b restricted to the range (b is projected first); x has mean zero
// on every component.
std::vector<double> apply_pseudoinverse(const SparseForm& L, std::span<const double> b,
                                        double tol, double max_mult, SolveReport* report = nullptr);

namespace detail {
// Cyclic Jacobi for small dense symmetric matrices (row major). Returns
// eigenvalues ascending; vectors column-wise in `vecs` when non-null.
std::vector<double> symmetric_eigen(int n, std::vector<double> a, std::vector<double>* vecs);
}  // namespace detail

}  // namespace usc
