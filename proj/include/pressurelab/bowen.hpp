#pragma once

#include <functional>
#include <optional>
#include <string>

#include "pressurelab/expanding_map.hpp"
#include "pressurelab/kernels.hpp"

namespace pressurelab {

/// Bisection for the zero of a decreasing function. Requires
/// fn(lo) > 0 > fn(hi), otherwise throws NoSignChange. Stops when the
/// bracket is no wider than tol and returns its midpoint.
double bowen_root(const std::function<double(double)>& fn, double lo, double hi, double tol);

/// Root over (0, dim]: 0 when fn(0) <= 0, dim when fn(dim) >= 0.
double clamped_root(const std::function<double(double)>& fn, double dim, double tol);

struct DimensionReport {
  std::string map_id;
  double t_lower = 0.0;  // root for -t log ||Df^n||
  double t_upper = 0.0;  // root for -t log m(Df^n)
  std::optional<double> t_root;
  int depth = 0;
  double bracket_width = 0.0;
  double tolerance = 0.0;

  static std::string csv_header();
  std::string csv_row() const;
};

struct DimensionOptions {
  /// Use 2 P_n - P_{n/2} (even depths only).
  bool extrapolate = true;
  /// Cocycle block length; 0 uses the whole word (one block).
  int block = 0;
  std::size_t max_leaves = kDefaultLeafCap;
};

DimensionReport dimension_report(const ExpandingMap& map, int depth_budget, double tol,
                                 const DimensionOptions& opts = {});

}  // namespace pressurelab
