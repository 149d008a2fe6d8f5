#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pressurelab/expanding_map.hpp"
#include "pressurelab/potential.hpp"

namespace pressurelab {

enum class Mode { dimension, pressure, lyapunov, stability, entropy, checks };

std::string_view to_string(Mode mode);

struct ExperimentConfig {
  std::string map = "family=cookie_cutter r1=3 r2=3";
  /// zero | const:c | cos:a | geometric:t | upper:t | lower:t
  std::string potential = "zero";
  int depth = 12;
  int max_depth = 22;
  double tol = 1e-6;
  std::vector<double> eps_schedule{0.0};
  int seeds = 16;
  std::uint64_t seed = 0;
  int alphabet = 2;
  /// Collar radius for distortion certificates; 0 picks the family default.
  double r0 = 0.0;
  std::string out = "pressurelab_out";
  Mode mode = Mode::dimension;
  /// Set when the map key was given explicitly (verify then checks only it).
  bool map_given = false;

  /// Applies key=value; throws ConfigError on unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
  /// Throws ConfigError unless every numeric field is positive (eps >= 0)
  /// and the map family exists.
  void validate() const;
  /// Canonical key=value text, one per line; hashed for the run record.
  std::string canonical() const;
};

/// Parses a flat key=value file body; '#' starts a comment.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

std::vector<double> parse_schedule(std::string_view text);
Potential parse_potential(std::string_view text, int dimension);

std::uint64_t fnv1a(std::string_view data);

struct RunRecord {
  std::uint64_t config_hash = 0;
  std::string timestamp;
  std::vector<std::pair<std::string, std::string>> versions;
  std::vector<std::string> files;
  std::vector<std::pair<std::string, std::string>> summary;
  /// Per-stage failures as "stage: Kind [module]: message".
  std::vector<std::string> errors;

  bool ok() const { return errors.empty(); }
  std::string text() const;
};

/// Runs the configured mode and writes run.csv, certificates.txt,
/// record.txt (and gaps.svg for stability) under config.out.
RunRecord run(const ExperimentConfig& config);

struct CheckResult {
  std::string name;
  std::string module;
  std::string map;
  double value = 0.0;
  double bound = 0.0;
  bool passed = false;
  std::string detail;
};

struct CheckReport {
  std::vector<CheckResult> checks;

  bool passed() const;
  std::string csv() const;
};

/// Invariant suite: conjugacy invariance, variational gap, Lipschitz
/// continuity and monotonicity of pressure, and, for perturbable families,
/// random conjugacy and distortion. Uses config.map when given, else all
/// built-in maps. Failures carry the module of the raised error.
CheckReport verify(const ExperimentConfig& config);

/// Cylinder representatives for (map, n), memoized in $PRESSURELAB_CACHE
/// when the variable is set.
struct CachedCylinders {
  std::vector<Word> words;
  std::vector<Point> points;
  bool from_cache = false;
};
CachedCylinders cached_cylinders(const ExpandingMap& map, int n);

/// Single-series SVG line plot.
std::string svg_line_plot(const std::vector<double>& x, const std::vector<double>& y, const std::string& x_label,
                          const std::string& y_label);

}  // namespace pressurelab
