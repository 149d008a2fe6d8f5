#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pressurelab/linalg.hpp"

namespace pressurelab {

enum class Ambient { interval, circle, torus };

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  double center() const { return 0.5 * (lo + hi); }
};

/// One injective expanding branch of a Markov map, given by closed-form
/// evaluables with exact derivatives.
struct BranchSpec {
  Interval domain;  // interval/circle maps; unused on the torus
  Interval image;   // interval/circle maps; unused on the torus
  std::function<Point(const Point&)> forward;
  std::function<Point(const Point&)> inverse;
  std::function<Mat2(const Point&)> derivative;
  /// Holder constant of the derivative (for exponent `holder_exponent` of the map).
  double derivative_holder_constant = 0.0;
  /// Representative of the length-1 cylinder: the center of the domain piece.
  Point seed;
};

/// Boolean transition matrix: transitions[a][b] != 0 iff the image of branch a
/// covers the domain of branch b.
using Adjacency = std::vector<std::vector<std::uint8_t>>;

/// A finite sequence of branch indices.
class Word {
 public:
  Word() = default;
  explicit Word(std::vector<int> symbols) : symbols_(std::move(symbols)) {}
  Word(std::initializer_list<int> symbols) : symbols_(symbols) {}

  const std::vector<int>& symbols() const { return symbols_; }
  std::size_t size() const { return symbols_.size(); }
  bool empty() const { return symbols_.empty(); }
  int operator[](std::size_t i) const { return symbols_[i]; }

  friend bool operator==(const Word&, const Word&) = default;

 private:
  std::vector<int> symbols_;
};

/// D_x f^n with log norms. `matrix` is normalized; the product equals
/// exp(log_scale) * matrix.
struct CocycleProduct {
  Point base_point;
  int length = 0;
  Mat2 matrix;
  double log_scale = 0.0;
  double log_norm = 0.0;
  double log_conorm = 0.0;

  Mat2 product() const { return std::exp(log_scale) * matrix; }
};

/// Piecewise expanding Markov map with symbolic coding. Immutable after
/// construction; copies share nothing mutable.
class ExpandingMap {
 public:
  struct Parts {
    std::string id;
    Ambient ambient = Ambient::interval;
    std::vector<BranchSpec> branches;
    Adjacency adjacency;
    double holder_exponent = 1.0;
    /// Index of the branch piece containing a point, or -1.
    std::function<int(const Point&)> locate;
    std::string domain_description;
  };

  /// Validates uniform expansion, the Markov property, irreducibility and
  /// branch inversion. Throws LabError (NonExpanding, NonMarkov, BadSpec).
  static ExpandingMap create(Parts parts);

  const std::string& id() const { return parts_.id; }
  Ambient ambient() const { return parts_.ambient; }
  int dimension() const { return parts_.ambient == Ambient::torus ? 2 : 1; }
  int branch_count() const { return static_cast<int>(parts_.branches.size()); }
  const BranchSpec& branch(int i) const { return parts_.branches[static_cast<std::size_t>(i)]; }
  const std::vector<BranchSpec>& branches() const { return parts_.branches; }
  const Adjacency& adjacency() const { return parts_.adjacency; }
  bool transition(int from, int to) const {
    return parts_.adjacency[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)] != 0;
  }
  double holder_exponent() const { return parts_.holder_exponent; }
  const std::string& domain_description() const { return parts_.domain_description; }

  int locate(const Point& x) const { return parts_.locate(x); }
  double distance(const Point& p, const Point& q) const;
  /// Diameter of the ambient space in its metric.
  double diameter() const;

  /// Sampled extremes of the singular values of Df over all branch pieces.
  double min_conorm() const { return min_conorm_; }
  double max_norm() const { return max_norm_; }
  /// Largest contraction factor of an inverse branch.
  double max_contraction() const { return 1.0 / min_conorm_; }
  /// Largest Holder constant of Df over the branches.
  double derivative_holder_constant() const;
  /// Largest length of a domain piece (interval/circle) or 1 on the torus.
  double max_piece_diameter() const;

  /// Lower bound for the distance between distinct cylinder representatives
  /// at their last differing position: distinct inverse images of a common
  /// point, and distinct branch seeds.
  double separation_scale() const { return separation_scale_; }
  double default_epsilon() const { return 0.5 * separation_scale_; }

  bool is_admissible(const Word& w) const;

 private:
  explicit ExpandingMap(Parts parts) : parts_(std::move(parts)) {}

  Parts parts_;
  double min_conorm_ = 0.0;
  double max_norm_ = 0.0;
  double separation_scale_ = 0.0;
};

/// Reduces a point into the fundamental domain of the ambient space.
Point wrap(Ambient ambient, const Point& p);

// Operations of the dynamics core.

/// Symbol k is the branch containing f^k(x). Throws EscapedRepeller.
Word itinerary(const ExpandingMap& map, const Point& x, int n);

/// Representative of the cylinder [w]: inverse branches applied right to left
/// to the seed of the last symbol.
Point cylinder_point(const ExpandingMap& map, const Word& w);

/// D_x f^n accumulated along the forward orbit. Throws EscapedRepeller.
CocycleProduct cocycle(const ExpandingMap& map, const Point& x, int n);

/// (||A||, m(A)) with m(A) = ||A^-1||^-1. Throws SingularMatrix.
std::pair<double, double> singular_norms(const Mat2& a);
std::pair<double, double> singular_norms(const CocycleProduct& c);

/// Extends an admissible word to length m >= |w| by repeatedly appending the
/// smallest admissible successor. The infinite extension names a point of J.
Word extend_word(const ExpandingMap& map, const Word& w, int m);

/// cylinder_point of the extension of w to length m: a point within
/// max_contraction^(m-1) * max_piece_diameter of the repeller point coded by
/// the infinite extension.
Point repeller_point(const ExpandingMap& map, const Word& w, int m);

}  // namespace pressurelab
