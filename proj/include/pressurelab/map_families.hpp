#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pressurelab/expanding_map.hpp"

namespace pressurelab {

/// Parsed flat key-value map description, e.g.
/// `family=cookie_cutter r1=3 r2=3 alpha=1.0`.
struct MapSpec {
  std::string family;
  std::vector<std::pair<std::string, std::string>> params;

  bool has(std::string_view key) const;
  double number(std::string_view key, double fallback) const;
  double number(std::string_view key) const;
  std::string text(std::string_view key) const;
  /// Tokens re-joined with single spaces, family first.
  std::string canonical() const;
};

MapSpec parse_map_spec(std::string_view text);

/// Builds one of the built-in families (doubling, cookie_cutter, circle,
/// golden_mean, affine, toral, toral_conformal, toral_diag). Throws
/// LabError: BadSpec, NonExpanding, NonMarkov.
ExpandingMap build_markov_map(std::string_view spec);
ExpandingMap build_markov_map(const MapSpec& spec);

/// Spec strings of the built-in example maps used by the check suites.
std::vector<std::string> builtin_map_specs();

/// Degree-N circle map with lift x -> N x + amplitude * sin(2 pi x).
ExpandingMap make_circle_map(int degree, double amplitude, double alpha = 1.0, std::string id = {});
ExpandingMap make_doubling();
/// x -> r1 x on [0, 1/r1] and x -> r2 x - (r2 - 1) on [1 - 1/r2, 1].
ExpandingMap make_cookie_cutter(double r1, double r2, double alpha = 1.0, std::string id = {});

/// Affine branch mapping [domain.lo, domain.hi] onto the segment from
/// image_at_lo to image_at_hi (decreasing when image_at_lo > image_at_hi).
struct AffinePiece {
  Interval domain;
  double image_at_lo = 0.0;
  double image_at_hi = 1.0;
};
ExpandingMap make_affine_markov(const std::vector<AffinePiece>& pieces, double alpha = 1.0, std::string id = {});
/// Golden-mean Markov map: slope (1+sqrt 5)/2, adjacency ((1,1),(1,0)).
ExpandingMap make_golden_mean();

/// Linear toral endomorphism x -> A x mod 1 for an integer matrix A.
ExpandingMap make_toral(const Mat2& integer_matrix, std::string id = {});
/// A = [[a, -b], [b, a]]: sqrt(a^2+b^2) times a rotation.
ExpandingMap make_toral_conformal(int a, int b);
ExpandingMap make_toral_diag(int d1, int d2);

/// Homeomorphism of the ambient space with exact Jacobian.
struct Homeomorphism {
  std::function<Point(const Point&)> forward;
  std::function<Point(const Point&)> inverse;
  std::function<Mat2(const Point&)> jacobian;
  double lipschitz = 1.0;
  std::string description;
};

/// x -> x + a sin(2 pi x) / (2 pi) on the circle; fixes 0 and 1/2.
Homeomorphism sine_circle_homeomorphism(double a);
/// x -> x + a sin(pi x) / pi on [0, 1]; fixes 0 and 1.
Homeomorphism sine_interval_homeomorphism(double a);
/// (x, y) -> (x + a sin(2 pi y) / (2 pi), y) on the torus.
Homeomorphism torus_shear_homeomorphism(double a);
Homeomorphism identity_homeomorphism();

/// h o f o h^-1, with branch pieces transported by h.
ExpandingMap conjugated_map(const ExpandingMap& f, const Homeomorphism& h);

/// Solves F(u) = target for increasing F on [lo, hi] (safeguarded Newton).
double solve_increasing(const std::function<double(double)>& fn,
                        const std::function<double(double)>& derivative,
                        double target, double lo, double hi);

}  // namespace pressurelab
