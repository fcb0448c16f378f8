#pragma once

#include "usc/geometry.hpp"
#include "usc/layout.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace usc {

// Level-n cell graph: one vertex per cell, an edge whenever two closed
// squares meet (point contacts included). Vertices are listed in
// lexicographic word order.
class CellGraph {
 public:
  CellGraph(int N, CellBlock cells, bool restricted);

  int level() const { return cells_.level; }
  int alphabet() const { return N_; }
  std::int32_t size() const { return static_cast<std::int32_t>(cells_.size()); }
  bool restricted() const { return restricted_; }
  const CellBlock& cells() const { return cells_; }
  std::int64_t word(std::int32_t v) const { return cells_.words[v]; }
  std::optional<std::int32_t> vertex_of(std::int64_t word_index) const;

  std::span<const std::pair<std::int32_t, std::int32_t>> edges() const { return edges_; }
  std::span<const std::int32_t> neighbors(std::int32_t v) const {
    return {adj_.data() + offsets_[v], adj_.data() + offsets_[v + 1]};
  }
  std::int32_t degree(std::int32_t v) const { return offsets_[v + 1] - offsets_[v]; }

  // Vertices whose word starts with the level-l prefix p.
  std::vector<std::int32_t> descendants(std::int64_t prefix, int l) const;
  // Graph ball of the given radius around v.
  std::vector<std::int32_t> ball(std::int32_t v, int radius) const;
  std::vector<std::int32_t> side_vertices(Side s) const;
  std::vector<std::int32_t> boundary_vertices() const;

 private:
  int N_;
  CellBlock cells_;
  bool restricted_;
  std::vector<std::pair<std::int32_t, std::int32_t>> edges_;
  std::vector<std::int32_t> offsets_, adj_;
};

using GraphPtr = std::shared_ptr<const CellGraph>;

GraphPtr build_graph(const CarpetSpec& spec, int n);
GraphPtr build_graph(const CarpetSpec& spec, int n, std::vector<std::int64_t> restriction);
GraphPtr build_graph(const CarpetSpec& spec, CellBlock cells);

class CellFunction {
 public:
  CellFunction(GraphPtr graph, std::vector<double> values);
  explicit CellFunction(GraphPtr graph);  // zeros

  const GraphPtr& graph() const { return graph_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::int32_t v) const { return values_[v]; }
  double& operator[](std::int32_t v) { return values_[v]; }

 private:
  GraphPtr graph_;
  std::vector<double> values_;
};

// D_n(f) and the bilinear D_n(f, g).
double energy(const CellFunction& f);
double energy(const CellFunction& f, const CellFunction& g);

struct PiecewiseConstant {
  int level = 0;
  std::vector<double> values;  // indexed by word index on W_level
};
struct Affine {
  Rational a, b, c;  // a x + b y + c
};
using ProjectInput = std::variant<PiecewiseConstant, Affine>;

// Cell averages; affine data are evaluated exactly at cell centres.
CellFunction project(const ProjectInput& u, const GraphPtr& graph);

// Block means over w . W_m, returned on a full level-n graph.
CellFunction coarsen(const CellFunction& f, const GraphPtr& target);

template <class T>
std::vector<T> coarsen_values(std::span<const T> fine, std::int64_t block) {
  std::vector<T> out(fine.size() / block);
  for (std::size_t i = 0; i < out.size(); ++i) {
    T s = 0;
    for (std::int64_t j = 0; j < block; ++j) s += fine[i * block + j];
    out[i] = s / static_cast<T>(block);
  }
  return out;
}

// "n_vertices n_edges" then one "i j" line per edge.
void write_edge_list(std::ostream& out, const CellGraph& g);
// CSV "word,value", words as dotted letter strings.
void write_cell_function(std::ostream& out, const CellFunction& f);

}  // namespace usc
