#pragma once
// Independent reference computations for the tests: exact rational
// geometry by brute force and dense linear algebra through Eigen.

#include "usc/cell_graph.hpp"
#include "usc/form_solver.hpp"
#include "usc/geometry.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

using EdgeSet = std::set<std::pair<std::int64_t, std::int64_t>>;

// All pairs of level-n words whose closed squares meet, by exact
// rational arithmetic over every pair.
EdgeSet brute_force_edges(const usc::CarpetSpec& spec, int n);

Eigen::MatrixXd dense_laplacian(const usc::CellGraph& g);
Eigen::MatrixXd dense_laplacian(int n, const std::vector<std::pair<int, int>>& edges,
                                const std::vector<double>& weights = {});
Eigen::MatrixXd to_dense(const usc::SparseForm& f);
// Unit-weight graph Laplacian in CSR form, built entry by entry.
usc::SparseForm sparse_laplacian(int n, const std::vector<std::pair<int, int>>& edges);

// Harmonic extension with fixed values, dense LDLT on the free block.
Eigen::VectorXd dense_dirichlet(const Eigen::MatrixXd& L, const std::vector<int>& fixed_vertices,
                                const std::vector<double>& fixed_values);
double dense_resistance(const Eigen::MatrixXd& L, const std::vector<int>& a, const std::vector<int>& b);
double dense_gap(const Eigen::MatrixXd& L);
Eigen::MatrixXd dense_schur(const Eigen::MatrixXd& L, const std::vector<int>& kept);
double dense_quadratic_sup(const Eigen::MatrixXd& L, const Eigen::VectorXd& a);

// Connected Erdos-Renyi graph (a spanning path is added first).
std::vector<std::pair<int, int>> random_connected_graph(int n, double p, std::uint64_t seed);

}  // namespace oracle
