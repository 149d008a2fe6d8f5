#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pressurelab/errors.hpp"
#include "pressurelab/expanding_map.hpp"
#include "pressurelab/kernels.hpp"
#include "pressurelab/potential.hpp"

namespace pressurelab {

struct PressureEstimate {
  std::string map_id;
  std::string potential_desc;
  double value = 0.0;  // nats per iterate
  int depth = 0;
  double separation = 0.0;
  /// Raw (non-extrapolated) values by depth n (or by iterate k for the
  /// sub-additive scheme).
  std::vector<std::pair<int, double>> per_depth_values;
  bool extrapolated = false;
  /// Last successive difference of the reported value.
  double residual = 0.0;
  /// Set when a singular potential is used on a map that failed the
  /// conformality screen.
  bool advisory = false;

  static std::string csv_header();
  std::string csv_row() const;
};

/// NoConvergence with the partial estimate attached.
class NoConvergenceError : public LabError {
 public:
  NoConvergenceError(std::string module, const std::string& what, PressureEstimate partial)
      : LabError(ErrorKind::NoConvergence, std::move(module), what), partial_(std::move(partial)) {}
  const PressureEstimate& partial() const { return partial_; }

 private:
  PressureEstimate partial_;
};

/// eps <= 0 selects map.default_epsilon(); throws EpsilonTooLarge when eps is
/// at or above the separation scale.
double resolve_epsilon(const ExpandingMap& map, double eps);

/// One cylinder point per admissible n-word, colex order.
std::vector<Point> separated_set(const ExpandingMap& map, int n, double eps);

/// (1/n) log sum_w exp S_n phi(x_w) over the cylinder separated set.
PressureEstimate pressure_additive(const ExpandingMap& map, const Potential& pot, int n, double eps = 0.0);

struct LimitOptions {
  int max_depth = 22;
  std::size_t max_leaves = kDefaultLeafCap;
};

/// Doubles n from 1 until successive Richardson values 2 P_2n - P_n differ by
/// less than tol. Throws NoConvergenceError at the cap.
PressureEstimate pressure_limit(const ExpandingMap& map, const Potential& pot, double tol,
                                const LimitOptions& opts = {});

struct SubadditiveOptions {
  /// Total word length L = k * n_inner, shared by every k. 0 picks the
  /// largest multiple of the largest k that is <= 16 and within the leaf cap.
  int total_length = 0;
  std::size_t max_leaves = kDefaultLeafCap;
};

/// (1/k) pressure of phi_k under f^k for each k in depths, budget matched.
/// Reports the last value and the k-sequence; throws NoConvergenceError when
/// the last two values differ by tol or more.
PressureEstimate pressure_subadditive(const ExpandingMap& map, const Potential& pot, const std::vector<int>& depths,
                                      double tol, const SubadditiveOptions& opts = {});

/// Per-leaf block sums for a singular potential; the pressure at any t is
/// then (1/L) log sum exp(-t * sums). Shared by the Bowen solver.
struct SingularLeaves {
  int length = 0;
  int block = 1;
  std::vector<double> log_norm;
  std::vector<double> log_conorm;

  double pressure(Potential::Kind kind, double t) const;
};
SingularLeaves singular_leaves(FiberSequence fibers, int length, int block, std::size_t max_leaves = kDefaultLeafCap);
SingularLeaves singular_leaves(const ExpandingMap& map, int length, int block, std::size_t max_leaves = kDefaultLeafCap);

/// Pressure of any potential at word length n; singular kinds use one block.
double pressure_at_depth(const ExpandingMap& map, const Potential& pot, int n);

/// (1/n) log spectral radius of the n-cylinder matrix with entries
/// exp S_n phi(x_u) * A[last u][first v]; weights from forward-orbit sums.
/// Throws MatrixTooLarge beyond max_cylinders.
double transfer_pressure(const ExpandingMap& map, const Potential& pot, int n, std::size_t max_cylinders = 1u << 18);

/// pressure - (1/p) phi_p(periodic point of orbit).
double variational_gap(const ExpandingMap& map, const Potential& pot, const Word& orbit, double pressure);
/// Same, with the pressure computed by pressure_limit (additive) or
/// pressure_subadditive (singular) at tolerance 1e-9.
double variational_gap(const ExpandingMap& map, const Potential& pot, const Word& orbit);

struct ConjugacyCheck {
  double difference = 0.0;  // pi_f2(F) - pi_f1(F o phi)
  double bound = 0.0;
  double equivariance_residual = 0.0;
  bool homeomorphism = true;

  /// Homeomorphism: |difference| <= bound. Semi-conjugacy: difference <= bound.
  bool passed() const;
};

struct ConjugacyOptions {
  int depth = 12;
  bool homeomorphism = true;
  double equivariance_tolerance = 1e-9;
  double tol = 1e-6;  // pressure_limit tolerance in the semi-conjugacy case
};

/// Compares pi_f2(F) with pi_f1(F o phi) for phi o f1 = f2 o phi. For a
/// conjugacy both sides use the same words at depth n and the bound is
/// Lip(F) * sum_{j<n} gamma2^j * D2 / n. For a semi-conjugacy the sides are
/// converged separately and only the inequality is checked. Throws
/// NotSemiConjugate when the sampled equivariance residual is too large.
ConjugacyCheck conjugate_pressure_check(const ExpandingMap& map1, const ExpandingMap& map2,
                                        const std::function<Point(const Point&)>& phi, const Potential& pot,
                                        const ConjugacyOptions& opts = {});

}  // namespace pressurelab
