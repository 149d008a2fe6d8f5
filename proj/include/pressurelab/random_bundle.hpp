#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "pressurelab/expanding_map.hpp"
#include "pressurelab/kernels.hpp"
#include "pressurelab/map_families.hpp"
#include "pressurelab/potential.hpp"

namespace pressurelab {

/// Finite window of a two-sided Bernoulli sequence. Index 0 of `window` is
/// position -horizon; the current base point sits at `shift_origin`.
struct BaseSample {
  std::uint64_t seed = 0;
  int horizon = 0;
  int alphabet_size = 2;
  std::vector<int> window;  // 2 * horizon + 1 symbols
  int shift_origin = 0;

  /// Symbol at shift_origin + offset. Throws HorizonExceeded.
  int symbol(int offset = 0) const;
  /// theta^k omega. Throws HorizonExceeded when the origin leaves the window.
  BaseSample shifted(int k = 1) const;
};

/// i.i.d. uniform symbols from mt19937_64(seed), drawn from position -horizon
/// upward as rng() % alphabet.
BaseSample sample_base(std::uint64_t seed, int horizon, int alphabet);

enum class PerturbationShape {
  circle_bump,    // x -> N x + (A + eps a) sin(2 pi x) mod 1
  cookie_slopes,  // slopes r_i (1 + eps a)
};

/// Perturbation family eps -> T_eps(omega) keyed by the symbol at the origin,
/// with amplitude a(s) = -1 + 2 s / (K - 1). Fiber maps are built once per
/// symbol and certified: min conorm >= 1 + c/2 with c = min conorm of f - 1.
class RandomFamily {
 public:
  static RandomFamily create(const MapSpec& base_spec, double epsilon, int alphabet = 2);
  static RandomFamily create(std::string_view base_spec, double epsilon, int alphabet = 2) {
    return create(parse_map_spec(base_spec), epsilon, alphabet);
  }

  const ExpandingMap& base_map() const { return *base_; }
  const MapSpec& base_spec() const { return spec_; }
  PerturbationShape shape() const { return shape_; }
  double epsilon() const { return epsilon_; }
  int alphabet() const { return alphabet_; }
  double amplitude(int symbol) const;
  /// Bound B with ||T_eps(omega) - f||_{C^1} <= eps * B.
  double holder_budget() const { return holder_budget_; }
  /// Required minimal expansion 1 + c/2.
  double expansion_certificate() const { return certificate_; }
  /// Smallest min conorm over the fiber maps.
  double min_fiber_conorm() const;
  /// Largest inverse contraction factor over the fiber maps.
  double gamma() const { return 1.0 / min_fiber_conorm(); }
  double max_fiber_piece_diameter() const;
  const ExpandingMap& fiber(int symbol) const { return *fibers_[static_cast<std::size_t>(symbol)]; }
  std::string description() const;

 private:
  MapSpec spec_;
  PerturbationShape shape_ = PerturbationShape::circle_bump;
  double epsilon_ = 0.0;
  int alphabet_ = 2;
  double holder_budget_ = 0.0;
  double certificate_ = 0.0;
  std::shared_ptr<const ExpandingMap> base_;
  std::vector<std::shared_ptr<const ExpandingMap>> fibers_;
};

/// T_eps(omega): the fiber map at the origin of omega.
const ExpandingMap& perturbed_map(const RandomFamily& fam, const BaseSample& omega);

/// Fiber maps T(omega), T(theta omega), ..., length entries.
std::vector<const ExpandingMap*> fiber_sequence(const RandomFamily& fam, const BaseSample& omega, int length);

/// h(omega) on symbolic codes. A point of J is named by an admissible word,
/// greedily extended to `depth` symbols; its image applies the fiber inverse
/// branches of T(omega), ..., T(theta^(m-2) omega) with the same symbols to
/// the seed of T(theta^(m-1) omega). Holds a reference to the family.
struct FiberConjugacy {
  const RandomFamily* family = nullptr;
  BaseSample omega;
  int depth = 0;
  double gamma = 0.0;
  /// gamma^(m-1) times the largest fiber piece: bounds the distance between
  /// the evaluator and the exact image, and the truncation mismatch in the
  /// equivariance relation.
  double error_bound = 0.0;

  Point evaluate(const Word& w) const;
  /// The base point of J coded by w (same extension, maps of f).
  Point base_point(const Word& w) const;
  FiberConjugacy shifted() const;
  /// max over words of d(T(omega) h(omega) x, h(theta omega) f x).
  double equivariance_residual(const std::vector<Word>& words) const;
};

/// depth <= 0 picks ceil(log(1e-12) / log(gamma)). Throws HorizonExceeded
/// when omega cannot supply depth fibers.
FiberConjugacy build_conjugacy(const RandomFamily& fam, const BaseSample& omega, int depth);

/// Images under h(omega) of the points of J coded by all admissible n-words.
std::vector<Point> fiber_repeller(const FiberConjugacy& conj, int n);

/// sup over the n-words of d(h(omega) x, x).
double conjugacy_displacement(const FiberConjugacy& conj, int n);

struct RandomPressureEstimate {
  double value = 0.0;
  int n = 0;
  double separation = 0.0;
  int omega_samples = 0;
  std::vector<double> per_omega;
  double std_error = 0.0;
};

struct RandomPressureOptions {
  /// Block length for singular potentials (0 = n, one block).
  int block = 0;
  /// Use consecutive segments theta^(jn) omega of one long base orbit
  /// instead of independent seeds (only the first seed is used).
  int single_orbit_segments = 0;
};

RandomPressureEstimate random_pressure(const RandomFamily& fam, const Potential& pot,
                                       const std::vector<std::uint64_t>& seeds, int n,
                                       const RandomPressureOptions& opts = {});

struct RandomRoots {
  double t = 0.0;  // root with -t log ||D T(n, omega)||
  double s = 0.0;  // root with -t log m(D T(n, omega))
  double std_error = 0.0;
  std::vector<double> per_seed_t;
  std::vector<double> per_seed_s;
};

RandomRoots random_bowen_roots(const RandomFamily& fam, const std::vector<std::uint64_t>& seeds, int n, double tol);

struct DistortionReport {
  double k0 = 0.0;
  double k = 0.0;
  double worst_violation = 0.0;
  double r0 = 0.0;
  int pairs = 0;
};

/// Collar radius of Step 1: a quarter of the smallest gap between branch
/// domains for interval maps, 1/4 on the circle.
double default_collar_radius(const ExpandingMap& map);

/// Samples pairs of fiber cylinder points sharing a prefix of 1..8 symbols
/// (so both lie in one branch piece), estimates the Holder constant K0 of
/// DT and checks both sides of the distortion inequality with
/// K = max{K0, diam V / r0, max|DT| / r0^alpha}. 1D families only.
DistortionReport distortion_constants(const RandomFamily& fam, const BaseSample& omega, int sample_pairs,
                                      double r0 = 0.0);

/// (1/n) min over fiber cylinder points of sum_k log m(D T(theta^k omega)).
double expansivity_min_growth(const RandomFamily& fam, const BaseSample& omega, int n);

double random_entropy(const RandomFamily& fam, const std::vector<std::uint64_t>& seeds, int n);

struct RandomConjugacyCheck {
  double fiber_pressure = 0.0;
  double base_pressure = 0.0;
  double difference = 0.0;
  double bound = 0.0;
  bool passed() const { return difference <= bound; }
};

/// |fiber pressure of F over fiber cylinder points - pressure of F o h over
/// the points of J coded by extended n-words|. Requires conj.depth >= n + 4.
RandomConjugacyCheck random_conjugacy_pressure_check(const RandomFamily& fam, const FiberConjugacy& conj,
                                                     const Potential& pot, int n);

struct StabilityRow {
  double epsilon = 0.0;
  double t_root = 0.0;
  double s_root = 0.0;
  double t0 = 0.0;
  double gap_t = 0.0;
  double gap_s = 0.0;
  double std_err = 0.0;
  int n = 0;
  int seeds = 0;
  // Diagnostics, not part of the CSV.
  double equivariance_residual = 0.0;
  double equivariance_bound = 0.0;
  double displacement = 0.0;
  double displacement_std_err = 0.0;
  double min_growth = 0.0;
  DistortionReport distortion;
};

struct StabilityTable {
  std::string family;
  std::vector<StabilityRow> rows;
  std::vector<std::pair<std::string, std::string>> certificates;
  /// Per-epsilon failures (the table is partial when non-empty).
  std::vector<std::string> errors;

  static std::string csv_header();
  std::string csv() const;
  std::string certificates_text() const;
};

struct StabilityOptions {
  int seeds = 16;
  std::uint64_t first_seed = 0;
  int alphabet = 2;
  int t0_depth = 12;
  int conjugacy_depth = 0;  // 0: default from gamma
  int distortion_pairs = 10000;
  double r0 = 0.0;          // 0: default_collar_radius
};

StabilityTable stability_experiment(const MapSpec& base_spec, const std::vector<double>& eps_schedule, int n,
                                    double tol, const StabilityOptions& opts = {});

}  // namespace pressurelab
