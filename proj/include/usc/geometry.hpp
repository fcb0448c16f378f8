#pragma once

#include "usc/rational.hpp"

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace usc {

// The eight isometries of the unit square.
//   v: (x, 1-y)   h: (1-x, y)   d1: (y, x)   d2: (1-y, 1-x)
//   r1: (1-y, x)  r2 = r1^2     r3 = r1^3
enum class Symmetry : std::uint8_t { id, v, h, d1, d2, r1, r2, r3 };

inline constexpr std::array<Symmetry, 8> kSymmetries{
    Symmetry::id, Symmetry::v,  Symmetry::h,  Symmetry::d1,
    Symmetry::d2, Symmetry::r1, Symmetry::r2, Symmetry::r3};

// Gamma(p) = A p + c, entries of A in {-1, 0, 1}, c in {0, 1}^2.
struct SymmetryMatrix {
  int a11, a12, a21, a22;
  int c1, c2;
};

const SymmetryMatrix& matrix(Symmetry g);
Symmetry compose(Symmetry outer, Symmetry inner);  // outer o inner
Symmetry inverse(Symmetry g);
std::string_view name(Symmetry g);
Symmetry parse_symmetry(std::string_view s);  // throws SpecError

struct Point {
  Rational x, y;
  friend bool operator==(const Point&, const Point&) = default;
};

Point apply(Symmetry g, const Point& p);

struct Similarity {
  Symmetry symmetry = Symmetry::id;
  Rational tx, ty;  // lower-left corner of the image square
};

// F_i(x) = (1/k) Gamma_i(x) + t_i, letters 1..N.
class CarpetSpec {
 public:
  // Structural checks only (k >= 3, 4(k-1) <= N <= k^2, t in [0, 1-1/k]^2).
  // Geometric checks live in validate().
  CarpetSpec(int k, std::vector<Similarity> maps);

  int k() const { return k_; }
  int N() const { return static_cast<int>(maps_.size()); }
  const std::vector<Similarity>& maps() const { return maps_; }
  const Similarity& map(int letter) const { return maps_.at(letter - 1); }

  // Least common multiple of translation denominators.
  std::int64_t lattice_denominator() const { return lattice_; }

  Point apply(int letter, const Point& p) const;

 private:
  int k_;
  std::vector<Similarity> maps_;
  std::int64_t lattice_ = 1;
};

class Word {
 public:
  Word() = default;
  explicit Word(std::vector<int> letters) : letters_(std::move(letters)) {}
  Word(std::initializer_list<int> letters) : letters_(letters) {}

  int level() const { return static_cast<int>(letters_.size()); }
  int operator[](std::size_t i) const { return letters_[i]; }
  const std::vector<int>& letters() const { return letters_; }
  Word operator+(const Word& tail) const;

  auto operator<=>(const Word&) const = default;

 private:
  std::vector<int> letters_;
};

std::string to_string(const Word& w);  // "1.2.3"
std::int64_t word_index(const Word& w, int N);
Word word_from_index(std::int64_t index, int level, int N);
std::int64_t checked_power(std::int64_t base, int exp);  // throws ResourceError

struct Square {
  Rational x, y, side;
  bool contains(const Point& p) const;
  Point center() const;
};

struct Intersection {
  enum class Kind { empty, point, segment };
  Kind kind = Kind::empty;
  Point a, b;       // point: a; segment: a <= b
  Rational length;  // segment only
};

enum class Side { bottom = 1, right = 2, top = 3, left = 4 };

struct ValidationReport {
  struct Check {
    std::string name;
    bool passed = true;
    std::string witness;
  };
  std::vector<Check> checks;
  bool ok() const;
};

struct ContactConstant {
  Rational c0_squared;
  std::optional<Rational> c0_exact;  // present when c0 itself is rational
  double c0 = 0.0;
};

ValidationReport validate(const CarpetSpec& spec);
void require_valid(const CarpetSpec& spec);  // throws ValidationError

Square cell_square(const CarpetSpec& spec, const Word& w);
Intersection cells_intersect(const CarpetSpec& spec, const Word& a, const Word& b);
ContactConstant contact_constant(const CarpetSpec& spec);
std::vector<Word> boundary_words(const CarpetSpec& spec, int n, std::optional<Side> side = {});
std::vector<Word> neighborhood(const CarpetSpec& spec, const Word& w, int radius = 2);
Word symmetry_action(const CarpetSpec& spec, Symmetry g, const Word& w);

// Translation-only maps along the boundary ring, letters 1..4(k-1).
std::vector<Similarity> boundary_ring(int k);
CarpetSpec standard_carpet();  // k = 3, N = 8

}  // namespace usc
