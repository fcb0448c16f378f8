#include "usc/cell_graph.hpp"

#include "usc/errors.hpp"
#include "usc/format.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <queue>

namespace usc {

CellGraph::CellGraph(int N, CellBlock cells, bool restricted)
    : N_(N), cells_(std::move(cells)), restricted_(restricted) {
  if (!std::is_sorted(cells_.words.begin(), cells_.words.end()))
    throw std::invalid_argument("cell words must be sorted");
  edges_ = block_adjacency(cells_);
  const std::size_t n = cells_.size();
  offsets_.assign(n + 1, 0);
  for (auto [a, b] : edges_) {
    ++offsets_[a + 1];
    ++offsets_[b + 1];
  }
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
  adj_.resize(offsets_[n]);
  std::vector<std::int32_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (auto [a, b] : edges_) {
    adj_[fill[a]++] = b;
    adj_[fill[b]++] = a;
  }
  for (std::size_t i = 0; i < n; ++i) std::sort(adj_.begin() + offsets_[i], adj_.begin() + offsets_[i + 1]);
}

std::optional<std::int32_t> CellGraph::vertex_of(std::int64_t word_index) const {
  auto it = std::lower_bound(cells_.words.begin(), cells_.words.end(), word_index);
  if (it == cells_.words.end() || *it != word_index) return std::nullopt;
  return static_cast<std::int32_t>(it - cells_.words.begin());
}

std::vector<std::int32_t> CellGraph::descendants(std::int64_t prefix, int l) const {
  if (l > level()) throw std::invalid_argument("prefix longer than graph level");
  std::int64_t block = checked_power(N_, level() - l);
  auto lo = std::lower_bound(cells_.words.begin(), cells_.words.end(), prefix * block);
  auto hi = std::lower_bound(cells_.words.begin(), cells_.words.end(), (prefix + 1) * block);
  std::vector<std::int32_t> out;
  for (auto it = lo; it != hi; ++it) out.push_back(static_cast<std::int32_t>(it - cells_.words.begin()));
  return out;
}

std::vector<std::int32_t> CellGraph::ball(std::int32_t v, int radius) const {
  std::vector<int> dist(size(), -1);
  std::vector<std::int32_t> order{v};
  dist[v] = 0;
  for (std::size_t h = 0; h < order.size(); ++h) {
    auto a = order[h];
    if (dist[a] == radius) continue;
    for (auto b : neighbors(a))
      if (dist[b] < 0) {
        dist[b] = dist[a] + 1;
        order.push_back(b);
      }
  }
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<std::int32_t> CellGraph::side_vertices(Side s) const {
  std::vector<std::int32_t> out;
  for (std::int32_t v = 0; v < size(); ++v)
    if (cells_.touches(v, s)) out.push_back(v);
  return out;
}

std::vector<std::int32_t> CellGraph::boundary_vertices() const {
  std::vector<std::int32_t> out;
  for (std::int32_t v = 0; v < size(); ++v)
    for (auto s : {Side::bottom, Side::right, Side::top, Side::left})
      if (cells_.touches(v, s)) {
        out.push_back(v);
        break;
      }
  return out;
}

GraphPtr build_graph(const CarpetSpec& spec, int n) {
  return std::make_shared<const CellGraph>(spec.N(), level_cells(spec, n), false);
}

GraphPtr build_graph(const CarpetSpec& spec, int n, std::vector<std::int64_t> restriction) {
  std::sort(restriction.begin(), restriction.end());
  restriction.erase(std::unique(restriction.begin(), restriction.end()), restriction.end());
  return std::make_shared<const CellGraph>(spec.N(), cells_of(spec, n, restriction), true);
}

GraphPtr build_graph(const CarpetSpec& spec, CellBlock cells) {
  const bool full = static_cast<std::int64_t>(cells.size()) == checked_power(spec.N(), cells.level);
  return std::make_shared<const CellGraph>(spec.N(), std::move(cells), !full);
}

CellFunction::CellFunction(GraphPtr graph, std::vector<double> values)
    : graph_(std::move(graph)), values_(std::move(values)) {
  if (!graph_) throw std::invalid_argument("null graph");
  if (static_cast<std::int64_t>(values_.size()) != graph_->size())
    throw std::invalid_argument("value count does not match the graph");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite cell value");
}

CellFunction::CellFunction(GraphPtr graph)
    : CellFunction(graph, std::vector<double>(graph ? graph->size() : 0, 0.0)) {}

double energy(const CellFunction& f) { return energy(f, f); }

double energy(const CellFunction& f, const CellFunction& g) {
  if (f.graph() != g.graph()) throw std::invalid_argument("functions live on different graphs");
  double s = 0.0;
  for (auto [a, b] : f.graph()->edges()) s += (f[a] - f[b]) * (g[a] - g[b]);
  return s;
}

CellFunction project(const ProjectInput& u, const GraphPtr& graph) {
  const auto& cells = graph->cells();
  std::vector<double> vals(graph->size());
  if (const auto* pc = std::get_if<PiecewiseConstant>(&u)) {
    if (pc->level > graph->level()) throw std::invalid_argument("projection to a coarser level");
    const std::int64_t block = checked_power(graph->alphabet(), graph->level() - pc->level);
    if (static_cast<std::int64_t>(pc->values.size()) != checked_power(graph->alphabet(), pc->level))
      throw std::invalid_argument("piecewise-constant data has wrong length");
    for (std::int32_t v = 0; v < graph->size(); ++v) vals[v] = pc->values[cells.words[v] / block];
  } else {
    const auto& af = std::get<Affine>(u);
    const Rational two_scale = 2 * Rational(cells.scale);
    for (std::int32_t v = 0; v < graph->size(); ++v) {
      Rational cx = Rational(2 * cells.x[v] + cells.side) / two_scale;
      Rational cy = Rational(2 * cells.y[v] + cells.side) / two_scale;
      vals[v] = to_double(af.a * cx + af.b * cy + af.c);
    }
  }
  return CellFunction(graph, std::move(vals));
}

CellFunction coarsen(const CellFunction& f, const GraphPtr& target) {
  const auto& g = *f.graph();
  if (g.restricted() || target->restricted()) throw std::invalid_argument("coarsen needs full graphs");
  if (target->level() > g.level()) throw std::invalid_argument("target level is finer");
  const std::int64_t block = checked_power(g.alphabet(), g.level() - target->level());
  return CellFunction(target, coarsen_values<double>(f.values(), block));
}

void write_edge_list(std::ostream& out, const CellGraph& g) {
  out << g.size() << ' ' << g.edges().size() << '\n';
  for (auto [a, b] : g.edges()) out << a << ' ' << b << '\n';
}

void write_cell_function(std::ostream& out, const CellFunction& f) {
  const auto& g = *f.graph();
  out << "word,value\n";
  for (std::int32_t v = 0; v < g.size(); ++v)
    out << to_string(word_from_index(g.word(v), g.level(), g.alphabet())) << ',' << format_real(f[v]) << '\n';
}

}  // namespace usc
