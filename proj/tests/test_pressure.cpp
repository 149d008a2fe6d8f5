#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pressurelab/errors.hpp"
#include "pressurelab/map_families.hpp"
#include "pressurelab/pressure.hpp"
#include "pressurelab/symbolic.hpp"
#include "test_support.hpp"

using namespace pressurelab;

namespace {

constexpr double kPi = std::numbers::pi;

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const LabError& e) {
    return e.kind();
  }
  FAIL("expected a LabError");
  return ErrorKind::BadSpec;
}

Potential cos_potential(double a) {
  return Potential::of_point([a](const Point& p) { return a * std::cos(2 * kPi * p.x); }, 2 * kPi * std::abs(a),
                             std::abs(a), "cos");
}

Potential torus_potential() {
  return Potential::of_point([](const Point& p) { return 0.3 * std::cos(2 * kPi * p.x) + 0.3 * std::sin(2 * kPi * p.y); },
                             1.2 * kPi, 0.6, "cos+sin");
}

Potential test_potential(const ExpandingMap& map) { return map.dimension() == 1 ? cos_potential(0.3) : torus_potential(); }

// Moran root of sum_i r_i^-t = 1 by bisection.
double moran_root(std::vector<double> slopes) {
  return testsupport::bisect(
      [&](double t) {
        double s = 0.0;
        for (double r : slopes) s += std::pow(r, -t);
        return std::log(s);
      },
      0.0, 2.0);
}

// Point of the repeller coded by a random long word.
Point random_repeller_point(const ExpandingMap& map, std::mt19937_64& rng) {
  return cylinder_point(map, testsupport::random_admissible(map, 40, rng));
}

}  // namespace

TEST_CASE("separated sets have one point per admissible word") {
  CHECK(separated_set(make_doubling(), 3, 0.1).size() == 8);
  CHECK(separated_set(build_markov_map("family=cookie_cutter r1=3 r2=3"), 4, 0.1).size() == 16);
  const ExpandingMap golden = make_golden_mean();
  CHECK(separated_set(golden, 5, 0.0).size() == 13);
  CHECK(kind_of([&] { separated_set(golden, 5, 0.99); }) == ErrorKind::EpsilonTooLarge);
  CHECK(kind_of([] { separated_set(make_doubling(), 3, 0.5); }) == ErrorKind::EpsilonTooLarge);
}

TEST_CASE("separated sets are (n, eps)-separated along forward orbits") {
  for (const auto& map : testsupport::builtin_maps()) {
    CAPTURE(map.id());
    const int n = map.branch_count() > 2 ? 3 : 5;
    const double eps = map.default_epsilon();
    const auto words = admissible_words(map.adjacency(), n);
    const auto pts = separated_set(map, n, eps);
    REQUIRE(pts.size() == words.size());
    // Forward orbits, each step taken with the branch named by the word.
    std::vector<std::vector<Point>> orbits;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      std::vector<Point> orbit{pts[i]};
      for (int k = 0; k + 1 < n; ++k) {
        orbit.push_back(wrap(map.ambient(), map.branch(words[i][static_cast<std::size_t>(k)]).forward(orbit.back())));
      }
      orbits.push_back(orbit);
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        double d = 0.0;
        for (int k = 0; k < n; ++k) d = std::max(d, map.distance(orbits[i][k], orbits[j][k]));
        CHECK(d > eps);
      }
    }
  }
}

TEST_CASE("additive pressure examples") {
  const ExpandingMap doubling = make_doubling();
  CHECK(pressure_additive(doubling, Potential::zero(), 10).value == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(std::abs(pressure_additive(doubling, Potential::constant(-std::log(2.0)), 10).value) < 1e-14);
  CHECK(std::abs(pressure_additive(doubling, Potential::geometric(1.0), 10).value) < 1e-14);

  const ExpandingMap cookie = build_markov_map("family=cookie_cutter r1=2 r2=4");
  const double value = pressure_additive(cookie, Potential::geometric(1.0), 12).value;
  CHECK(std::abs(value - std::log(0.75)) < 2e-3);
  CHECK(std::abs(value - transfer_pressure(cookie, Potential::geometric(1.0), 12)) < 2e-3);
}

TEST_CASE("pressure limit examples") {
  const ExpandingMap doubling = make_doubling();
  const PressureEstimate flat = pressure_limit(doubling, Potential::zero(), 1e-6);
  CHECK(flat.value == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(flat.extrapolated);
  CHECK(flat.depth <= 2);
  for (const auto& [n, v] : flat.per_depth_values) CHECK(v == doctest::Approx(std::log(2.0)).epsilon(1e-14));

  const ExpandingMap cookie = build_markov_map("family=cookie_cutter r1=3 r2=3");
  const double t = std::log(2.0) / std::log(3.0);
  const PressureEstimate moran = pressure_limit(cookie, Potential::constant(-t * std::log(3.0)), 1e-6);
  CHECK(std::abs(moran.value) < 1e-6);
  CHECK(moran.residual < 1e-6);

  // Nonlinear full-branch map: the pressure of -log f' is 0 and the transfer
  // matrix is an independent route at matching depth.
  const ExpandingMap wavy = make_circle_map(2, 0.05);
  const PressureEstimate est = pressure_limit(wavy, Potential::geometric(1.0), 1e-3);
  CHECK(std::abs(est.value - transfer_pressure(wavy, Potential::geometric(1.0), est.depth)) < 5e-3);
  CHECK(std::abs(est.value) < 5e-3);
}

TEST_CASE("pressure limit reports the partial estimate when it cannot converge") {
  LimitOptions opts;
  opts.max_depth = 4;
  try {
    pressure_limit(make_circle_map(3, 0.1), cos_potential(0.3), 1e-14, opts);
    FAIL("expected NoConvergence");
  } catch (const NoConvergenceError& e) {
    CHECK(e.kind() == ErrorKind::NoConvergence);
    CHECK(!e.partial().per_depth_values.empty());
    CHECK(e.partial().residual >= 1e-14);
    CHECK(std::isfinite(e.partial().value));
  }
}

TEST_CASE("sub-additive pressure examples") {
  const ExpandingMap doubling = make_doubling();
  const PressureEstimate d = pressure_subadditive(doubling, Potential::singular_lower(1.0), {1, 2, 4, 8}, 1e-9);
  REQUIRE(d.per_depth_values.size() == 4);
  for (const auto& [k, v] : d.per_depth_values) CHECK(std::abs(v) < 1e-12);

  const ExpandingMap cookie = build_markov_map("family=cookie_cutter r1=2 r2=4");
  const double t = moran_root({2.0, 4.0});
  CHECK(t == doctest::Approx(std::log((1 + std::sqrt(5.0)) / 2) / std::log(2.0)).epsilon(1e-12));
  const PressureEstimate c = pressure_subadditive(cookie, Potential::singular_lower(t), {1, 2, 4, 8}, 1e-2);
  CHECK(std::abs(c.value) <= 5e-3);

  // 3 times a quarter turn: degree 9, both singular values 3.
  const ExpandingMap rot = build_markov_map("family=toral_conformal a=0 b=3");
  SubadditiveOptions opts;
  opts.total_length = 4;
  const PressureEstimate r = pressure_subadditive(rot, Potential::singular_upper(2.0), {1, 2, 4}, 1e-9, opts);
  for (const auto& [k, v] : r.per_depth_values) CHECK(std::abs(v) < 1e-12);
  CHECK(!r.advisory);
}

TEST_CASE("transfer matrix examples") {
  CHECK(transfer_pressure(make_doubling(), Potential::zero(), 1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  const ExpandingMap cookie = build_markov_map("family=cookie_cutter r1=2 r2=4");
  CHECK(transfer_pressure(cookie, Potential::geometric(1.0), 1) == doctest::Approx(std::log(0.75)).epsilon(1e-12));
  CHECK(transfer_pressure(make_golden_mean(), Potential::zero(), 1) ==
        doctest::Approx(std::log((1 + std::sqrt(5.0)) / 2)).epsilon(1e-12));
  CHECK(kind_of([] { transfer_pressure(make_doubling(), Potential::zero(), 12, 1000); }) == ErrorKind::MatrixTooLarge);
}

TEST_CASE("variational gap examples") {
  const ExpandingMap doubling = make_doubling();
  for (const auto& w : primitive_cycles(doubling.adjacency(), 5)) {
    CHECK(variational_gap(doubling, Potential::zero(), w) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
    // Constant potential: pressure 0, orbit average -log 2, so the gap is the
    // entropy log 2 that periodic measures lack.
    CHECK(variational_gap(doubling, Potential::constant(-std::log(2.0)), w) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  }
  const ExpandingMap cookie = build_markov_map("family=cookie_cutter r1=2 r2=4");
  const double t = moran_root({2.0, 4.0});
  const double gap = variational_gap(cookie, Potential::singular_lower(t), Word{0}, 0.0);
  CHECK(gap == doctest::Approx(t * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("variational inequality on periodic orbits of built-in maps") {
  for (const auto& map : testsupport::builtin_maps()) {
    CAPTURE(map.id());
    const Potential pot = test_potential(map);
    double pressure = 0.0;
    try {
      pressure = pressure_limit(map, pot, 1e-6).value;
    } catch (const NoConvergenceError& e) {
      pressure = e.partial().value - e.partial().residual;
    }
    for (const auto& w : primitive_cycles(map.adjacency(), map.branch_count() > 2 ? 3 : 6)) {
      CHECK(variational_gap(map, pot, w, pressure) >= -1e-6);
    }
  }
}

TEST_CASE("conjugacy examples") {
  const ExpandingMap doubling = make_doubling();
  const Potential pot = cos_potential(0.3);

  const ConjugacyCheck same = conjugate_pressure_check(doubling, doubling, [](const Point& p) { return p; }, pot);
  CHECK(std::abs(same.difference) < 1e-12);
  CHECK(same.passed());

  const Homeomorphism h = sine_circle_homeomorphism(0.3);
  const ExpandingMap conj = conjugated_map(doubling, h);
  const ConjugacyCheck moved = conjugate_pressure_check(doubling, conj, h.forward, pot);
  CHECK(moved.passed());
  CHECK(std::abs(moved.difference) <= moved.bound);
  CHECK(moved.equivariance_residual < 1e-9);

  // x -> 2x is a 2-to-1 factor map from x -> 4x onto itself.
  const ExpandingMap four = make_circle_map(4, 0.0);
  ConjugacyOptions opts;
  opts.homeomorphism = false;
  const ConjugacyCheck factor = conjugate_pressure_check(
      four, four, [](const Point& p) { return Point{2 * p.x - std::floor(2 * p.x), 0.0}; }, pot, opts);
  CHECK(factor.difference <= opts.tol + factor.bound);
  CHECK(factor.passed());

  CHECK(kind_of([&] {
          conjugate_pressure_check(doubling, doubling, [](const Point& p) { return Point{p.x + 0.1, 0.0}; }, pot);
        }) == ErrorKind::NotSemiConjugate);
}

TEST_CASE("singular pressures decrease in t with slope at least min log conorm") {
  for (const auto& map : testsupport::builtin_maps()) {
    CAPTURE(map.id());
    const int n = map.branch_count() > 2 ? 5 : 8;
    const double slope = std::log(map.min_conorm());
    REQUIRE(slope > 0.0);
    for (auto kind : {Potential::Kind::singular_upper, Potential::Kind::singular_lower}) {
      const SingularLeaves leaves = singular_leaves(map, n, 1);
      std::vector<double> p;
      for (int i = 0; i < 10; ++i) p.push_back(leaves.pressure(kind, 0.25 * i));
      for (int i = 0; i + 1 < 10; ++i) CHECK(p[i] >= p[i + 1] + 0.25 * slope - 1e-12);
      // The same through the public one-block route.
      const double a = pressure_at_depth(
          map, kind == Potential::Kind::singular_upper ? Potential::singular_upper(0.5) : Potential::singular_lower(0.5), n);
      const double b = pressure_at_depth(
          map, kind == Potential::Kind::singular_upper ? Potential::singular_upper(1.5) : Potential::singular_lower(1.5), n);
      CHECK(a >= b + slope - 1e-12);
    }
  }
}

TEST_CASE("cylinder sums agree with the transfer matrix on 1D built-ins") {
  for (const auto& map : testsupport::builtin_maps()) {
    if (map.dimension() != 1) continue;
    CAPTURE(map.id());
    const int n = 10;
    for (const Potential& pot : {cos_potential(0.3), Potential::geometric(0.7), Potential::zero()}) {
      CAPTURE(pot.description());
      CHECK(std::abs(pressure_additive(map, pot, n).value - transfer_pressure(map, pot, n)) <= 1e-2);
    }
  }
}

TEST_CASE("pressure is 1-Lipschitz in the sup norm") {
  std::mt19937_64 rng(11);
  for (const auto& map : testsupport::builtin_maps()) {
    CAPTURE(map.id());
    const Potential phi = test_potential(map);
    for (int trial = 0; trial < 4; ++trial) {
      const double freq = std::floor(testsupport::uniform(rng, 1.0, 5.0));
      const double phase = testsupport::uniform(rng, 0.0, 2 * kPi);
      const Potential psi = Potential::of_point(
          [freq, phase](const Point& p) { return std::sin(2 * kPi * freq * (p.x + p.y) + phase); }, 4 * kPi * freq, 1.0,
          "sin");
      const double eps = testsupport::uniform(rng, 0.01, 1.0);
      const Potential moved = phi.plus(psi, eps);
      for (int n = 1; n <= (map.branch_count() > 2 ? 5 : 9); ++n) {
        const double diff = pressure_additive(map, moved, n).value - pressure_additive(map, phi, n).value;
        CHECK(std::abs(diff) <= eps * (1 + 1e-12));
      }
    }
  }
}

TEST_CASE("upper and lower singular pressures coincide in dimension one") {
  for (const auto& map : testsupport::builtin_maps()) {
    if (map.dimension() != 1) continue;
    CAPTURE(map.id());
    for (int n = 1; n <= 10; ++n) {
      for (double t : {0.3, 0.7, 1.0}) {
        CHECK(std::abs(pressure_at_depth(map, Potential::singular_upper(t), n) -
                       pressure_at_depth(map, Potential::singular_lower(t), n)) <= 1e-10);
      }
    }
  }
}

TEST_CASE("singular potentials are sup- and sub-additive along orbits") {
  std::mt19937_64 rng(3);
  for (const auto& map : testsupport::builtin_maps()) {
    CAPTURE(map.id());
    for (int trial = 0; trial < 50; ++trial) {
      const Point x = random_repeller_point(map, rng);
      const int n = 1 + static_cast<int>(rng() % 8);
      const int m = 1 + static_cast<int>(rng() % 8);
      const CocycleProduct whole = cocycle(map, x, n + m);
      const CocycleProduct head = cocycle(map, x, n);
      Point y = x;
      for (int k = 0; k < n; ++k) y = wrap(map.ambient(), map.branch(map.locate(y)).forward(y));
      const CocycleProduct tail = cocycle(map, y, m);
      // phi_n = -log||D f^n|| is sup-additive; psi_n = -log m(D f^n) is sub-additive.
      CHECK(-whole.log_norm >= -head.log_norm - tail.log_norm - 1e-10);
      CHECK(-whole.log_conorm <= -head.log_conorm - tail.log_conorm + 1e-10);
    }
  }
}

TEST_CASE("pressure estimates serialize to one CSV row") {
  CHECK(PressureEstimate::csv_header() == "map_id,potential_desc,n,eps,value,residual");
  const PressureEstimate e = pressure_additive(make_doubling(), Potential::zero(), 4);
  const std::string row = e.csv_row();
  CHECK(row.rfind("family=doubling,zero,4,", 0) == 0);
  CHECK(std::count(row.begin(), row.end(), ',') == 5);
}
