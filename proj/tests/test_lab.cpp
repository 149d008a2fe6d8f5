#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pressurelab/errors.hpp"
#include "pressurelab/lab.hpp"
#include "pressurelab/map_families.hpp"

using namespace pressurelab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pressurelab_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string summary(const RunRecord& rec, const std::string& key) {
  for (const auto& [k, v] : rec.summary) {
    if (k == key) return v;
  }
  return {};
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const LabError& e) {
    return e.kind();
  }
  FAIL("expected a LabError");
  return ErrorKind::BadSpec;
}

}  // namespace

TEST_CASE("config files parse and reject bad input") {
  const ExperimentConfig c = parse_config(
      "# experiment\n"
      "map = family=doubling\n"
      "mode = entropy\n"
      "depth = 10\n"
      "eps_schedule = 0.2, 0.1\n"
      "seeds = 4  # trailing comment\n");
  CHECK(c.map == "family=doubling");
  CHECK(c.mode == Mode::entropy);
  CHECK(c.depth == 10);
  CHECK(c.eps_schedule == std::vector<double>{0.2, 0.1});
  CHECK(c.seeds == 4);
  CHECK(c.map_given);

  CHECK(kind_of([] { parse_config("colour = red\n"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_config("depth = twelve\n"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_config("mode = sideways\n"); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_config("depth = 0\n").validate(); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_config("tol = -1\n").validate(); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_config("eps_schedule = 0.1,-0.1\n").validate(); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_config("map = family=spiral\n").validate(); }) == ErrorKind::ConfigError);
  CHECK(kind_of([] { parse_config("potential = wobble:1\n").validate(); }) == ErrorKind::ConfigError);
  try {
    parse_config("colour = red\n");
  } catch (const LabError& e) {
    CHECK(e.module() == "lab-cli");
  }
  CHECK_NOTHROW(ExperimentConfig{}.validate());
}

TEST_CASE("schedules and potentials") {
  CHECK(parse_schedule("0.2,0.1,0.05") == std::vector<double>{0.2, 0.1, 0.05});
  CHECK(parse_potential("zero", 1).description() == "zero");
  CHECK(parse_potential("upper:2", 2).kind() == Potential::Kind::singular_upper);
  CHECK(parse_potential("lower:0.5", 1).t() == 0.5);
  CHECK(parse_potential("geometric:1", 1).is_geometric());
  const Potential c = parse_potential("cos:0.3", 1);
  const ExpandingMap d = make_doubling();
  CHECK(c.evaluate(d, 0, Point{0.0, 0.0}) == doctest::Approx(0.3));
  CHECK(c.sup_norm() == doctest::Approx(0.3));
  CHECK(parse_potential("const:-1.5", 1).evaluate(d, 0, Point{0.2, 0.0}) == -1.5);
}

TEST_CASE("config hash is content derived") {
  // Published FNV-1a 64-bit test vectors.
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
  ExperimentConfig a, b;
  CHECK(a.canonical() == b.canonical());
  b.set("depth", "14");
  CHECK(a.canonical() != b.canonical());
  b.set("depth", "12");
  CHECK(a.canonical() == b.canonical());
}

TEST_CASE("dimension run reproduces the Moran root and byte-identical outputs") {
  ExperimentConfig c;
  c.mode = Mode::dimension;
  c.depth = 14;
  c.out = scratch("dimension").string();
  const RunRecord first = run(c);
  REQUIRE(first.ok());
  const std::string t_root = summary(first, "t_root");
  REQUIRE(!t_root.empty());
  CHECK(std::abs(std::stod(t_root) - std::log(2.0) / std::log(3.0)) < 2e-3);
  for (const char* f : {"run.csv", "certificates.txt", "record.txt"}) CHECK(fs::exists(fs::path(c.out) / f));
  const std::string csv1 = slurp(fs::path(c.out) / "run.csv");
  const RunRecord second = run(c);
  CHECK(slurp(fs::path(c.out) / "run.csv") == csv1);
  CHECK(first.config_hash == second.config_hash);
  CHECK(first.summary == second.summary);
  CHECK(first.text().find("config_hash") != std::string::npos);
}

TEST_CASE("entropy of the doubling map") {
  ExperimentConfig c;
  c.set("map", "family=doubling");
  c.mode = Mode::entropy;
  c.out = scratch("entropy").string();
  const RunRecord rec = run(c);
  REQUIRE(rec.ok());
  CHECK(std::abs(std::stod(summary(rec, "entropy")) - std::log(2.0)) < 1e-12);
  CHECK(slurp(fs::path(c.out) / "run.csv").rfind("epsilon,entropy,std_err,n,seeds\n", 0) == 0);
}

TEST_CASE("pressure and lyapunov runs") {
  ExperimentConfig c;
  c.set("map", "family=cookie_cutter r1=2 r2=4");
  c.set("potential", "geometric:1");
  c.mode = Mode::pressure;
  c.out = scratch("pressure").string();
  const RunRecord p = run(c);
  REQUIRE(p.ok());
  CHECK(std::abs(std::stod(summary(p, "pressure")) - std::log(0.75)) < 1e-5);

  c.mode = Mode::lyapunov;
  c.out = scratch("lyapunov").string();
  const RunRecord l = run(c);
  REQUIRE(l.ok());
  CHECK(summary(l, "verdict") == "conformal_like");
}

TEST_CASE("stability run writes four rows and a gap plot") {
  ExperimentConfig c;
  c.mode = Mode::stability;
  c.set("eps_schedule", "0.2,0.1,0.05,0.025");
  c.depth = 8;
  c.out = scratch("stability").string();
  const RunRecord rec = run(c);
  REQUIRE(rec.ok());
  const std::string csv = slurp(fs::path(c.out) / "run.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  const std::string svg = slurp(fs::path(c.out) / "gaps.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("polyline") != std::string::npos);
  // Gap column decreases along the schedule.
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  double previous = 1e9;
  while (std::getline(lines, line)) {
    std::vector<std::string> cells;
    std::stringstream row(line);
    for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
    REQUIRE(cells.size() == 9);
    const double gap = std::stod(cells[4]);
    CHECK(gap < previous);
    previous = gap;
  }
  CHECK(run(c).summary == rec.summary);
  CHECK(slurp(fs::path(c.out) / "run.csv") == csv);
  CHECK(slurp(fs::path(c.out) / "certificates.txt").find("eps=0.2") != std::string::npos);
}

TEST_CASE("cylinder cache returns identical points") {
  const fs::path dir = scratch("cache");
  fs::create_directories(dir);
  ::setenv("PRESSURELAB_CACHE", dir.c_str(), 1);
  const ExpandingMap map = build_markov_map("family=circle degree=3 amp=0.1");
  const CachedCylinders a = cached_cylinders(map, 5);
  const CachedCylinders b = cached_cylinders(map, 5);
  ::unsetenv("PRESSURELAB_CACHE");
  CHECK(!a.from_cache);
  CHECK(b.from_cache);
  REQUIRE(a.points.size() == 243);
  REQUIRE(b.points.size() == 243);
  CHECK(a.words == b.words);
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(std::memcmp(&a.points[i], &b.points[i], sizeof(Point)) == 0);
  }
  CHECK(!cached_cylinders(map, 5).from_cache);
}

TEST_CASE("corrupted map is attributed to the dynamics core") {
  ExperimentConfig c;
  c.set("map", "family=cookie_cutter r1=3 r2=0.9");
  c.out = scratch("corrupted").string();
  const RunRecord rec = run(c);
  REQUIRE(!rec.ok());
  CHECK(rec.errors.front().find("NonExpanding [dynamics-core]") != std::string::npos);

  const CheckReport report = verify(c);
  CHECK(!report.passed());
  REQUIRE(!report.checks.empty());
  CHECK(report.checks.front().module == "dynamics-core");
}

TEST_CASE("verify suite") {
  ExperimentConfig c;
  c.set("eps_schedule", "0,0.05");
  const CheckReport all = verify(c);
  for (const auto& r : all.checks) {
    CAPTURE(r.name);
    CAPTURE(r.map);
    CAPTURE(r.detail);
    CHECK(r.passed);
  }
  CHECK(all.checks.size() > 40);

  ExperimentConfig big;
  big.set("map", "family=doubling");
  big.set("eps_schedule", "0.9");
  const CheckReport refused = verify(big);
  CHECK(!refused.passed());
  bool surfaced = false;
  for (const auto& r : refused.checks) {
    if (!r.passed && r.detail.find("PerturbationTooLarge") != std::string::npos) {
      surfaced = true;
      CHECK(r.module == "random-bundle");
    }
  }
  CHECK(surfaced);
}

TEST_CASE("svg plot has one vertex per point") {
  const std::string svg = svg_line_plot({0.2, 0.1, 0.05}, {0.03, 0.01, 0.004}, "eps", "gap");
  const auto start = svg.find("points=\"");
  REQUIRE(start != std::string::npos);
  const auto end = svg.find('"', start + 8);
  const std::string pts = svg.substr(start + 8, end - start - 8);
  CHECK(std::count(pts.begin(), pts.end(), ',') == 3);
}
