#pragma once

#include "usc/geometry.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace usc {

inline constexpr std::int64_t kMaxCells = 20'000'000;

// Same-level cells on an integer lattice. A unit length is `scale`
// lattice steps (L * k^level), every square has side `side` (= L).
struct CellBlock {
  int level = 0;
  std::int64_t scale = 1;
  std::int64_t side = 1;
  std::vector<std::int64_t> words;  // word indices, ascending
  std::vector<std::int64_t> x, y;   // lower-left corners
  std::vector<Symmetry> sym;        // isometry part of F_w

  std::size_t size() const { return words.size(); }
  bool touches(std::size_t i, Side s) const;
  // Closed squares intersect.
  bool adjacent(std::size_t i, std::size_t j) const;
};

CellBlock level_cells(const CarpetSpec& spec, int n);
// roots . W_m, in lexicographic order when the roots are sorted.
CellBlock expand(const CarpetSpec& spec, const CellBlock& roots, int m);
CellBlock cells_of(const CarpetSpec& spec, int n, std::span<const std::int64_t> words);

// Word index map w -> g(w) on W_n.
std::vector<std::int64_t> symmetry_permutation(const CarpetSpec& spec, Symmetry g, int n);

// Neighbour lists by spatial hashing of corners; pairs (i, j), i < j.
std::vector<std::pair<std::int32_t, std::int32_t>> block_adjacency(const CellBlock& cells);

}  // namespace usc
