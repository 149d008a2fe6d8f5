#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pressurelab/expanding_map.hpp"
#include "pressurelab/potential.hpp"

namespace pressurelab {

/// Map applied at each position of a word: fibers[k] acts at time k. A
/// deterministic system repeats one map. All fibers share the adjacency.
using FiberSequence = std::span<const ExpandingMap* const>;

inline constexpr std::size_t kDefaultLeafCap = std::size_t{1} << 23;

struct CylinderRequest {
  int length = 1;  // word length L
  /// Singular sums are taken over blocks of this many steps (L % block == 0):
  /// log ||D f^block|| per block, summed. Block 1 gives pointwise cocycles.
  int block = 1;
  /// Additive potential summed along the orbit; null skips the sum.
  const Potential* additive = nullptr;
  bool singular = false;
  bool keep_points = false;
  bool keep_words = false;
  std::size_t max_leaves = kDefaultLeafCap;
};

/// Per-cylinder data in colex order (position 0 varies fastest).
struct CylinderLeaves {
  int length = 0;
  std::size_t count = 0;
  std::vector<double> additive;    // S_L phi(x_w)
  std::vector<double> log_norm;    // sum over blocks of log ||D f^block||
  std::vector<double> log_conorm;  // sum over blocks of log m(D f^block)
  std::vector<Point> points;       // x_w
  std::vector<std::uint8_t> words; // count * length symbols, row-major

  Word word(std::size_t i) const;
};

/// Fills a fiber sequence with one map.
std::vector<const ExpandingMap*> constant_fibers(const ExpandingMap& map, int length);

namespace kernels {

/// Parallel depth-first enumeration of all admissible words of length L. The
/// word is built right to left; each node carries the point, the additive sum
/// and the running block product. Work is split over suffix tasks and
/// concatenated in task order, so output is independent of the thread count.
/// Throws MatrixTooLarge beyond max_leaves.
CylinderLeaves enumerate_cylinders(FiberSequence fibers, const CylinderRequest& req);

/// log sum exp(v) by a pairwise tree over fixed chunks; bit-identical for any
/// thread count.
double log_sum_exp(std::span<const double> v);
/// log sum exp(scale * v).
double log_sum_exp_scaled(std::span<const double> v, double scale);

}  // namespace kernels

namespace reference {

/// Serial oracle: odometer enumeration, each orbit point recomputed as the
/// cylinder point of the word suffix, cocycle blocks multiplied explicitly.
CylinderLeaves enumerate_cylinders(FiberSequence fibers, const CylinderRequest& req);

/// Sequential left-to-right log sum exp.
double log_sum_exp(std::span<const double> v);

}  // namespace reference

}  // namespace pressurelab
