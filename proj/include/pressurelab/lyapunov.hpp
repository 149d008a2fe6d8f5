#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pressurelab/expanding_map.hpp"

namespace pressurelab {

struct LyapunovSample {
  std::string measure_tag;
  std::vector<double> exponents;  // ascending, one per ambient dimension
  int length = 0;

  double spread() const { return exponents.back() - exponents.front(); }
};

enum class ConformalityVerdict { conformal_like, spread_detected };

struct ConformalityReport {
  std::vector<LyapunovSample> samples;
  double max_spread = 0.0;
  double min_exponent = 0.0;
  double threshold = 1e-6;
  ConformalityVerdict verdict = ConformalityVerdict::conformal_like;

  /// One row per sample plus a summary row.
  std::string csv() const;
};

/// Exponents along the forward orbit of x, QR re-factorized every step.
/// Requires n >= 32; throws EscapedRepeller when the orbit leaves the pieces.
LyapunovSample lyapunov_exponents(const ExpandingMap& map, const Point& start, int n);

/// Exponents of the periodic-orbit measure of w: log moduli of the
/// eigenvalues of D f^p at the exact periodic point, divided by p. `length`
/// is n rounded up to a multiple of p.
LyapunovSample lyapunov_exponents(const ExpandingMap& map, const Word& periodic, int n);

/// Exponents along the orbit coded by a long admissible word, each orbit point
/// taken as the cylinder point of the corresponding suffix (no forward drift).
LyapunovSample birkhoff_exponents(const ExpandingMap& map, const Word& w, std::string tag);

struct ConformalityOptions {
  double threshold = 1e-6;
  std::uint64_t seed = 0;
  int birkhoff_length = 256;
};

ConformalityReport average_conformal_check(const ExpandingMap& map, int max_period, int birkhoff_samples,
                                           const ConformalityOptions& opts = {});

/// Random admissible word, successors uniform among allowed symbols.
Word random_word(const ExpandingMap& map, int length, std::uint64_t seed);

}  // namespace pressurelab
