// Acceptance run: one PASS/FAIL line per criterion. Tolerances are fixed
// below; the exit code is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "pressurelab/bowen.hpp"
#include "pressurelab/errors.hpp"
#include "pressurelab/map_families.hpp"
#include "pressurelab/pressure.hpp"
#include "pressurelab/random_bundle.hpp"
#include "pressurelab/symbolic.hpp"
#include "test_support.hpp"

using namespace pressurelab;

namespace {

constexpr double kPi = std::numbers::pi;

// Pinned tolerances.
constexpr double kMoranTol = 2e-3;
constexpr double kMoranSeconds = 10.0;
constexpr double kEntropyTol = 1e-9;
constexpr double kOracleTol = 1e-2;
constexpr int kOracleDepth = 10;
constexpr double kSlopeSlack = 1e-6;
constexpr double kIteratedTol = 5e-3;
constexpr double kStabilityFinalGap = 0.02;
constexpr double kStabilitySeconds = 300.0;
constexpr double kMcSlack = 2e-3;  // added to 3 std errors
constexpr int kMcDraws = 200000;
constexpr double kDistortionSlack = -1e-10;
constexpr int kDistortionPairs = 10000;
constexpr int kGrowthDepth = 8;
constexpr double kVariationalTol = -1e-6;
constexpr int kMaxPeriod = 8;

const std::vector<double> kSchedule{0.2, 0.1, 0.05, 0.025};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
  bool passed = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Potential cos_potential(double a) {
  return Potential::of_point([a](const Point& p) { return a * std::cos(2 * kPi * p.x); }, 2 * kPi * std::abs(a),
                             std::abs(a), "cos");
}

Potential test_potential(int dim) {
  if (dim == 1) return cos_potential(0.3);
  return Potential::of_point([](const Point& p) { return 0.3 * std::cos(2 * kPi * p.x) + 0.3 * std::sin(2 * kPi * p.y); },
                             1.2 * kPi, 0.6, "cos+sin");
}

bool conformal(const ExpandingMap& map) { return map.id().find("toral_diag") == std::string::npos; }

bool perturbable(const ExpandingMap& map) { return map.dimension() == 1; }

Homeomorphism homeomorphism_for(const ExpandingMap& map) {
  switch (map.ambient()) {
    case Ambient::circle: return sine_circle_homeomorphism(0.3);
    case Ambient::interval: return sine_interval_homeomorphism(0.3);
    case Ambient::torus: return torus_shear_homeomorphism(0.1);
  }
  return identity_homeomorphism();
}

// Largest n <= cap with branch_count^n <= limit.
int depth_within(const ExpandingMap& map, double limit, int cap) {
  int n = 1;
  while (n < cap && std::pow(map.branch_count(), n + 1) <= limit) ++n;
  return n;
}

std::vector<std::uint64_t> seeds(int count) {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < count; ++i) out.push_back(static_cast<std::uint64_t>(i));
  return out;
}

Outcome moran_dimensions() {
  Outcome o;
  const double golden = std::log((1 + std::sqrt(5.0)) / 2) / std::log(2.0);
  const double bisected = testsupport::bisect([](double t) { return std::log(std::pow(2.0, -t) + std::pow(4.0, -t)); }, 0, 2);
  o.require(std::abs(golden - bisected) < 1e-12, "Moran oracles disagree");
  const std::vector<std::pair<const char*, double>> cases{
      {"family=cookie_cutter r1=3 r2=3", std::log(2.0) / std::log(3.0)}, {"family=cookie_cutter r1=2 r2=4", golden}};
  for (const auto& [spec, oracle] : cases) {
    const auto start = Clock::now();
    const DimensionReport r = dimension_report(build_markov_map(spec), 14, 1e-9);
    const double elapsed = seconds_since(start);
    const double t = r.t_root.value_or(r.t_lower);
    o.require(r.t_root.has_value(), std::string(spec) + " brackets did not close");
    o.require(std::abs(t - oracle) <= kMoranTol, std::string(spec) + fmt(" t=%.6f oracle=%.6f", t, oracle));
    o.require(elapsed < kMoranSeconds, std::string(spec) + fmt(" took %.1fs", elapsed));
    o.detail += (o.detail.empty() ? "" : ", ") + std::string(spec + 7) + fmt(": |t-t0|=%.1e in %.2fs", std::abs(t - oracle), elapsed);
  }
  return o;
}

Outcome entropy() {
  Outcome o;
  double worst = 0.0;
  for (const auto& map : testsupport::builtin_maps()) {
    const PressureEstimate e = pressure_limit(map, Potential::zero(), kEntropyTol);
    const double err = std::abs(e.value - std::log(static_cast<double>(map.branch_count())));
    worst = std::max(worst, err);
    o.require(err <= kEntropyTol, map.id() + fmt(" off by %.2e", err));
  }
  if (o.passed) o.detail = fmt("max |P(0) - log b| = %.1e", worst);
  return o;
}

Outcome oracle_agreement() {
  Outcome o;
  double worst = 0.0;
  for (const auto& map : testsupport::builtin_maps()) {
    if (map.dimension() != 1) continue;
    for (const Potential& pot : {cos_potential(0.3), cos_potential(-0.8), Potential::geometric(0.5), Potential::geometric(1.0)}) {
      const double diff =
          std::abs(pressure_additive(map, pot, kOracleDepth).value - transfer_pressure(map, pot, kOracleDepth));
      worst = std::max(worst, diff);
      o.require(diff <= kOracleTol, map.id() + " " + pot.description() + fmt(" differ by %.2e", diff));
    }
  }
  if (o.passed) o.detail = fmt("max difference %.2e at n=10", worst);
  return o;
}

Outcome monotonicity_and_lipschitz() {
  Outcome o;
  std::mt19937_64 rng(2024);
  double worst_slope_margin = -1e300, worst_lipschitz = 0.0;
  for (const auto& map : testsupport::builtin_maps()) {
    const int n = depth_within(map, 1 << 16, 12);
    const SingularLeaves leaves = singular_leaves(map, n, 1);
    const double min_log_conorm = std::log(map.min_conorm());
    for (auto kind : {Potential::Kind::singular_upper, Potential::Kind::singular_lower}) {
      for (int i = 0; i + 1 < 10; ++i) {
        const double t1 = 0.25 * i, t2 = 0.25 * (i + 1);
        const double slope = (leaves.pressure(kind, t2) - leaves.pressure(kind, t1)) / (t2 - t1);
        worst_slope_margin = std::max(worst_slope_margin, slope + min_log_conorm);
        o.require(slope <= -min_log_conorm + kSlopeSlack, map.id() + fmt(" slope %.4f at t=%.2f", slope, t1));
      }
    }
    const Potential phi = test_potential(map.dimension());
    for (int trial = 0; trial < 4; ++trial) {
      const double freq = 1.0 + static_cast<double>(rng() % 4);
      const double phase = testsupport::uniform(rng, 0.0, 2 * kPi);
      const Potential psi = Potential::of_point(
          [freq, phase](const Point& p) { return std::sin(2 * kPi * freq * (p.x + 0.5 * p.y) + phase); }, 4 * kPi * freq,
          1.0, "sin");
      const double eps = testsupport::uniform(rng, 0.01, 1.0);
      const Potential moved = phi.plus(psi, eps);
      for (int depth = 1; depth <= n; ++depth) {
        const double diff = std::abs(pressure_additive(map, moved, depth).value - pressure_additive(map, phi, depth).value);
        worst_lipschitz = std::max(worst_lipschitz, diff / eps);
        o.require(diff <= eps * (1 + 1e-12), map.id() + fmt(" moved %.4f for eps %.4f", diff, eps));
      }
    }
  }
  if (o.passed) {
    o.detail = fmt("max slope + min log m = %.3f, max |dP|/eps = %.4f", worst_slope_margin, worst_lipschitz);
  }
  return o;
}

Outcome iterated_pressure() {
  Outcome o;
  double worst = 0.0;
  for (const auto& map : testsupport::builtin_maps()) {
    if (!conformal(map)) continue;
    const DimensionReport rep = dimension_report(map, depth_within(map, 1 << 16, 16) & ~1, 1e-10);
    const double t = rep.t_root.value_or(rep.t_lower);
    PressureEstimate est;
    try {
      est = pressure_subadditive(map, Potential::singular_upper(t), {1, 2, 4, 8}, kIteratedTol);
    } catch (const NoConvergenceError& e) {
      est = e.partial();
    }
    double lo = 1e300, hi = -1e300;
    for (const auto& [k, v] : est.per_depth_values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    o.require(est.per_depth_values.size() == 4, map.id() + " missing iterates");
    worst = std::max(worst, hi - lo);
    o.require(hi - lo < kIteratedTol, map.id() + fmt(" spread %.2e across k", hi - lo));
  }
  if (o.passed) o.detail = fmt("max spread across k = %.1e", worst);
  return o;
}

Outcome conjugacy_invariance() {
  Outcome o;
  int deterministic = 0, random = 0;
  for (const auto& map : testsupport::builtin_maps()) {
    const Homeomorphism h = homeomorphism_for(map);
    const ExpandingMap g = conjugated_map(map, h);
    ConjugacyOptions opts;
    opts.depth = depth_within(map, 1 << 16, 12);
    const ConjugacyCheck c = conjugate_pressure_check(map, g, h.forward, test_potential(map.dimension()), opts);
    o.require(c.passed(), map.id() + fmt(" |diff| %.2e > bound %.2e", std::abs(c.difference), c.bound));
    ++deterministic;
    if (!perturbable(map)) continue;
    for (double eps : {0.0, 0.025, 0.05}) {
      const RandomFamily fam = RandomFamily::create(map.id(), eps);
      for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const FiberConjugacy conj = build_conjugacy(fam, sample_base(seed, 96, 2), 0);
        for (const Potential& pot : {test_potential(1), Potential::geometric(1.0)}) {
          const RandomConjugacyCheck r = random_conjugacy_pressure_check(fam, conj, pot, 6);
          o.require(r.passed(), map.id() + fmt(" eps=%.3f random diff %.2e > %.2e", eps, r.difference, r.bound));
          ++random;
        }
        const double eq = conj.equivariance_residual(admissible_words(map.adjacency(), 6));
        o.require(eq <= 2 * conj.error_bound, map.id() + fmt(" equivariance %.2e", eq));
      }
    }
  }
  if (o.passed) o.detail = std::to_string(deterministic) + " deterministic and " + std::to_string(random) + " random checks";
  return o;
}

Outcome structural_stability() {
  Outcome o;
  const auto start = Clock::now();
  const MapSpec spec = parse_map_spec("family=cookie_cutter r1=3 r2=3");
  const StabilityTable table = stability_experiment(spec, kSchedule, 8, 1e-9);
  const double elapsed = seconds_since(start);
  o.require(table.errors.empty(), "per-eps failures");
  o.require(table.rows.size() == kSchedule.size(), "missing rows");
  if (!o.passed) return o;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const StabilityRow& row = table.rows[i];
    const RandomFamily fam = RandomFamily::create(spec, row.epsilon);
    const int depth = static_cast<int>(std::ceil(std::log(1e-12) / std::log(fam.gamma())));
    o.require(row.equivariance_residual <= 2 * std::pow(fam.gamma(), depth),
              fmt("eps=%.3f equivariance %.2e", row.epsilon, row.equivariance_residual));
    const testsupport::ExpectationRoot mc = testsupport::expectation_root_mc(3.0, 3.0, row.epsilon, 2, kMcDraws);
    const double allowed = 3 * row.std_err + kMcSlack;
    o.require(std::abs(row.t_root - mc.root) <= allowed,
              fmt("eps=%.3f |t - t_MC| = %.4f > %.4f", row.epsilon, std::abs(row.t_root - mc.root), allowed));
    o.require(std::abs(row.s_root - mc.root) <= allowed,
              fmt("eps=%.3f |s - t_MC| = %.4f > %.4f", row.epsilon, std::abs(row.s_root - mc.root), allowed));
    if (i > 0) {
      const StabilityRow& prev = table.rows[i - 1];
      const double slack = std::max(prev.displacement_std_err, row.displacement_std_err);
      o.require(row.displacement <= prev.displacement + slack, fmt("sup|h-id| rose at eps=%.3f", row.epsilon));
      o.require(row.gap_t < prev.gap_t, fmt("gap_t rose at eps=%.3f", row.epsilon));
      o.require(row.gap_s < prev.gap_s, fmt("gap_s rose at eps=%.3f", row.epsilon));
    }
  }
  const StabilityRow& last = table.rows.back();
  o.require(last.gap_t < kStabilityFinalGap && last.gap_s < kStabilityFinalGap, fmt("final gaps %.4f %.4f", last.gap_t, last.gap_s));
  o.require(elapsed < kStabilitySeconds, fmt("took %.1fs", elapsed));
  if (o.passed) {
    o.detail = fmt("gaps %.4f -> %.4f, sup|h-id| -> %.4f", table.rows.front().gap_t, last.gap_t, last.displacement) +
               fmt(" in %.2fs", elapsed);
  }
  return o;
}

Outcome distortion_and_growth() {
  Outcome o;
  double worst = 1e300, min_growth = 1e300;
  int fibers = 0, skipped = 0;
  for (const auto& map : testsupport::builtin_maps()) {
    if (!perturbable(map)) continue;
    for (double eps : kSchedule) {
      std::unique_ptr<RandomFamily> fam;
      try {
        fam = std::make_unique<RandomFamily>(RandomFamily::create(map.id(), eps));
      } catch (const LabError& e) {
        if (e.kind() != ErrorKind::PerturbationTooLarge) throw;
        ++skipped;  // not a certified family at this eps
        continue;
      }
      for (int s = 0; s < fam->alphabet(); ++s) {
        BaseSample omega = sample_base(static_cast<std::uint64_t>(s), 16, fam->alphabet());
        omega.window[static_cast<std::size_t>(omega.horizon)] = s;
        const DistortionReport d = distortion_constants(*fam, omega, kDistortionPairs);
        worst = std::min(worst, d.worst_violation);
        o.require(d.pairs >= kDistortionPairs, "too few pairs");
        o.require(d.worst_violation >= kDistortionSlack, map.id() + fmt(" eps=%.3f slack %.2e", eps, d.worst_violation));
        ++fibers;
      }
      for (std::uint64_t seed = 0; seed < 16; ++seed) {
        const double g = expansivity_min_growth(*fam, sample_base(seed, kGrowthDepth, fam->alphabet()), kGrowthDepth);
        min_growth = std::min(min_growth, g);
        o.require(g > 0.0, map.id() + fmt(" eps=%.3f growth %.3f", eps, g));
      }
    }
  }
  if (o.passed) {
    o.detail = std::to_string(fibers) + " fibers, worst slack " + fmt("%.2e", worst) + fmt(", min growth %.4f", min_growth) +
               ", " + std::to_string(skipped) + " uncertified (family, eps) pairs refused";
  }
  return o;
}

Outcome variational_inequality() {
  Outcome o;
  double worst = 1e300;
  std::size_t orbits = 0;
  for (const auto& map : testsupport::builtin_maps()) {
    for (const Potential& pot : {Potential::zero(), test_potential(map.dimension())}) {
      double pressure = 0.0;
      try {
        pressure = pressure_limit(map, pot, 1e-9).value;
      } catch (const NoConvergenceError& e) {
        pressure = e.partial().value - e.partial().residual;
      }
      for (const Word& w : primitive_cycles(map.adjacency(), kMaxPeriod)) {
        const double gap = variational_gap(map, pot, w, pressure);
        worst = std::min(worst, gap);
        ++orbits;
        if (gap < kVariationalTol) o.require(false, map.id() + fmt(" gap %.2e", gap));
      }
    }
  }
  if (o.passed) o.detail = std::to_string(orbits) + " orbit measures, min gap " + fmt("%.4f", worst);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Moran-oracle dimensions", moran_dimensions},
      {"entropy of full-branch maps", entropy},
      {"separated-set vs transfer-matrix pressure", oracle_agreement},
      {"monotonicity in t and Lipschitz continuity", monotonicity_and_lipschitz},
      {"iterated-pressure identity", iterated_pressure},
      {"conjugacy invariance", conjugacy_invariance},
      {"structural stability", structural_stability},
      {"distortion certificate and expansion growth", distortion_and_growth},
      {"variational inequality", variational_inequality},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.passed = false;
      o.detail = std::string("threw ") + e.what();
    }
    if (!o.passed) ++failed;
    std::printf("%s %zu %s: %s\n", o.passed ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
