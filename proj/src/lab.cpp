#include "pressurelab/lab.hpp"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "pressurelab/bowen.hpp"
#include "pressurelab/errors.hpp"
#include "pressurelab/kernels.hpp"
#include "pressurelab/lyapunov.hpp"
#include "pressurelab/map_families.hpp"
#include "pressurelab/pressure.hpp"
#include "pressurelab/random_bundle.hpp"
#include "pressurelab/symbolic.hpp"

namespace pressurelab {

namespace fs = std::filesystem;

namespace {

constexpr const char* kModule = "lab-cli";
constexpr const char* kVersion = "0.1.0";

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void config_error(const std::string& what) { throw LabError(ErrorKind::ConfigError, kModule, what); }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(d)) {
    config_error("key '" + std::string(key) + "': not a number: '" + v + "'");
  }
  return d;
}

long long parse_int(std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    config_error("key '" + std::string(key) + "': not an integer: '" + v + "'");
  }
  return out;
}

Mode parse_mode(std::string_view v) {
  for (Mode m : {Mode::dimension, Mode::pressure, Mode::lyapunov, Mode::stability, Mode::entropy, Mode::checks}) {
    if (to_string(m) == v) return m;
  }
  config_error("unknown mode '" + std::string(v) + "'");
}

bool is_perturbable(const MapSpec& spec) {
  return spec.family == "doubling" || spec.family == "circle" || spec.family == "cookie_cutter";
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) config_error("cannot write " + path.string());
  out << body;
}

std::string map_certificate(const ExpandingMap& map) {
  std::string out;
  out += "map=" + map.id() + "\n";
  out += "dimension=" + std::to_string(map.dimension()) + "\n";
  out += "branches=" + std::to_string(map.branch_count()) + "\n";
  out += "min_conorm=" + fmt17(map.min_conorm()) + "\n";
  out += "max_norm=" + fmt17(map.max_norm()) + "\n";
  out += "holder_exponent=" + fmt17(map.holder_exponent()) + "\n";
  out += "derivative_holder_constant=" + fmt17(map.derivative_holder_constant()) + "\n";
  out += "separation_scale=" + fmt17(map.separation_scale()) + "\n";
  return out;
}

/// Smooth test potential used by the check suite.
Potential test_potential(int dimension) {
  constexpr double a = 0.3;
  const double two_pi = 2.0 * std::numbers::pi;
  if (dimension == 1) {
    return Potential::of_point([=](const Point& x) { return a * std::cos(two_pi * x.x); }, a * two_pi, a,
                               "0.3*cos(2pi x)");
  }
  return Potential::of_point([=](const Point& x) { return a * std::cos(two_pi * x.x) + a * std::sin(two_pi * x.y); },
                             a * two_pi * std::sqrt(2.0), 2.0 * a, "0.3*cos(2pi x)+0.3*sin(2pi y)");
}

Potential test_perturbation(int dimension) {
  const double two_pi = 2.0 * std::numbers::pi;
  if (dimension == 1) {
    return Potential::of_point([=](const Point& x) { return std::sin(two_pi * x.x); }, two_pi, 1.0, "sin(2pi x)");
  }
  return Potential::of_point([=](const Point& x) { return std::sin(two_pi * (x.x + x.y)); }, two_pi * std::sqrt(2.0),
                             1.0, "sin(2pi(x+y))");
}

/// Largest depth n <= cap with branch_count^n <= limit.
int depth_within(const ExpandingMap& map, double limit, int cap) {
  int n = 1;
  while (n < cap && std::pow(map.branch_count(), n + 1) <= limit) ++n;
  return n;
}

/// pressure_limit, falling back to the partial estimate at the depth cap;
/// callers widen their bounds by the reported residual.
PressureEstimate limit_or_partial(const ExpandingMap& map, const Potential& pot) {
  try {
    return pressure_limit(map, pot, 1e-9);
  } catch (const NoConvergenceError& e) {
    return e.partial();
  }
}

Homeomorphism check_homeomorphism(const ExpandingMap& map) {
  switch (map.ambient()) {
    case Ambient::circle: return sine_circle_homeomorphism(0.3);
    case Ambient::interval: return sine_interval_homeomorphism(0.3);
    case Ambient::torus: return torus_shear_homeomorphism(0.1);
  }
  return identity_homeomorphism();
}

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::dimension: return "dimension";
    case Mode::pressure: return "pressure";
    case Mode::lyapunov: return "lyapunov";
    case Mode::stability: return "stability";
    case Mode::entropy: return "entropy";
    case Mode::checks: return "checks";
  }
  return "unknown";
}

std::vector<double> parse_schedule(std::string_view text) {
  std::vector<double> out;
  std::string s(text);
  std::replace(s.begin(), s.end(), ';', ',');
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_double("eps_schedule", item));
  }
  if (out.empty()) config_error("empty eps schedule");
  return out;
}

Potential parse_potential(std::string_view text, int dimension) {
  const std::string t = trim(text);
  if (t == "zero") return Potential::zero();
  const auto colon = t.find(':');
  if (colon == std::string::npos) config_error("unknown potential '" + t + "'");
  const std::string name = t.substr(0, colon);
  const double v = parse_double("potential", t.substr(colon + 1));
  if (name == "const") return Potential::constant(v);
  if (name == "geometric") return Potential::geometric(v);
  if (name == "upper") return Potential::singular_upper(v);
  if (name == "lower") return Potential::singular_lower(v);
  if (name == "cos") {
    const double two_pi = 2.0 * std::numbers::pi;
    const double lip = std::abs(v) * two_pi * (dimension == 2 ? std::sqrt(2.0) : 1.0);
    return Potential::of_point([=](const Point& x) { return v * std::cos(two_pi * (x.x + x.y)); }, lip,
                               std::abs(v), fmt17(v) + "*cos(2pi(x+y))");
  }
  config_error("unknown potential '" + t + "'");
}

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  if (key == "map") {
    map = v;
    map_given = true;
  } else if (key == "potential") {
    potential = v;
  } else if (key == "depth") {
    depth = static_cast<int>(parse_int(key, v));
  } else if (key == "max_depth") {
    max_depth = static_cast<int>(parse_int(key, v));
  } else if (key == "tol") {
    tol = parse_double(key, v);
  } else if (key == "eps_schedule" || key == "eps") {
    eps_schedule = parse_schedule(v);
  } else if (key == "seeds") {
    seeds = static_cast<int>(parse_int(key, v));
  } else if (key == "seed") {
    const long long s = parse_int(key, v);
    if (s < 0) config_error("seed must be >= 0");
    seed = static_cast<std::uint64_t>(s);
  } else if (key == "alphabet") {
    alphabet = static_cast<int>(parse_int(key, v));
  } else if (key == "r0") {
    r0 = parse_double(key, v);
  } else if (key == "out") {
    out = v;
  } else if (key == "mode") {
    mode = parse_mode(v);
  } else {
    config_error("unknown key '" + std::string(key) + "'");
  }
}

void ExperimentConfig::validate() const {
  if (depth <= 0) config_error("depth must be positive");
  if (max_depth <= 0) config_error("max_depth must be positive");
  if (!(tol > 0.0)) config_error("tol must be positive");
  if (seeds <= 0) config_error("seeds must be positive");
  if (alphabet <= 0) config_error("alphabet must be positive");
  if (r0 < 0.0) config_error("r0 must be >= 0");
  if (out.empty()) config_error("output directory must be set");
  for (double e : eps_schedule) {
    if (!(e >= 0.0)) config_error("eps schedule entries must be >= 0");
  }
  MapSpec spec;
  try {
    spec = parse_map_spec(map);
  } catch (const LabError& e) {
    config_error(std::string("bad map spec: ") + e.what());
  }
  static const std::vector<std::string> families{"doubling", "cookie_cutter", "circle", "golden_mean", "affine",
                                                 "toral", "toral_conformal", "toral_diag"};
  if (std::find(families.begin(), families.end(), spec.family) == families.end()) {
    config_error("unknown map family '" + spec.family + "'");
  }
  parse_potential(potential, 1);
}

std::string ExperimentConfig::canonical() const {
  std::string out;
  out += "mode=" + std::string(to_string(mode)) + "\n";
  out += "map=" + parse_map_spec(map).canonical() + "\n";
  out += "potential=" + potential + "\n";
  out += "depth=" + std::to_string(depth) + "\n";
  out += "max_depth=" + std::to_string(max_depth) + "\n";
  out += "tol=" + fmt17(tol) + "\n";
  out += "eps_schedule=";
  for (std::size_t i = 0; i < eps_schedule.size(); ++i) out += (i ? "," : "") + fmt17(eps_schedule[i]);
  out += "\nseeds=" + std::to_string(seeds) + "\n";
  out += "seed=" + std::to_string(seed) + "\n";
  out += "alphabet=" + std::to_string(alphabet) + "\n";
  out += "r0=" + fmt17(r0) + "\n";
  return out;
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_error("line " + std::to_string(lineno) + ": expected key=value");
    base.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) config_error("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string RunRecord::text() const {
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash));
  std::string out = "config_hash=" + std::string(hash) + "\n";
  out += "timestamp=" + timestamp + "\n";
  for (const auto& [k, v] : versions) out += "version." + k + "=" + v + "\n";
  for (const auto& f : files) out += "file=" + f + "\n";
  for (const auto& [k, v] : summary) out += "summary." + k + "=" + v + "\n";
  for (const auto& e : errors) out += "error=" + e + "\n";
  out += std::string("status=") + (ok() ? "ok" : "failed") + "\n";
  return out;
}

CachedCylinders cached_cylinders(const ExpandingMap& map, int n) {
  CachedCylinders out;
  const char* dir = std::getenv("PRESSURELAB_CACHE");
  char name[64];
  std::snprintf(name, sizeof name, "%016llx_%d.cyl", static_cast<unsigned long long>(fnv1a(map.id())), n);
  fs::path path;
  if (dir != nullptr && *dir != '\0') {
    path = fs::path(dir) / name;
    std::ifstream in(path);
    std::string id;
    std::size_t count = 0;
    if (in && std::getline(in, id) && id == map.id() && (in >> count)) {
      out.words.reserve(count);
      out.points.reserve(count);
      for (std::size_t i = 0; i < count; ++i) {
        std::vector<int> w(static_cast<std::size_t>(n));
        for (int& s : w) in >> s;
        std::string xs, ys;
        in >> xs >> ys;
        out.words.emplace_back(std::move(w));
        out.points.push_back({std::strtod(xs.c_str(), nullptr), std::strtod(ys.c_str(), nullptr)});
      }
      if (in) {
        out.from_cache = true;
        return out;
      }
      out = {};
    }
  }
  CylinderRequest req;
  req.length = n;
  req.keep_points = true;
  req.keep_words = true;
  const CylinderLeaves leaves = kernels::enumerate_cylinders(constant_fibers(map, n), req);
  for (std::size_t i = 0; i < leaves.count; ++i) out.words.push_back(leaves.word(i));
  out.points = leaves.points;
  if (!path.empty()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    std::ofstream o(path);
    o << map.id() << "\n" << leaves.count << "\n";
    char buf[64];
    for (std::size_t i = 0; i < leaves.count; ++i) {
      for (int s : out.words[i].symbols()) o << s << ' ';
      std::snprintf(buf, sizeof buf, "%a", out.points[i].x);
      o << buf << ' ';
      std::snprintf(buf, sizeof buf, "%a", out.points[i].y);
      o << buf << "\n";
    }
  }
  return out;
}

std::string svg_line_plot(const std::vector<double>& x, const std::vector<double>& y, const std::string& x_label,
                          const std::string& y_label) {
  constexpr double w = 480, h = 320, m = 48;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!x.empty()) {
    x0 = *std::min_element(x.begin(), x.end());
    x1 = *std::max_element(x.begin(), x.end());
    y0 = std::min(0.0, *std::min_element(y.begin(), y.end()));
    y1 = *std::max_element(y.begin(), y.end());
  }
  if (x1 <= x0) x1 = x0 + 1.0;
  if (y1 <= y0) y1 = y0 + 1.0;
  auto px = [&](double v) { return m + (v - x0) / (x1 - x0) * (w - 2 * m); };
  auto py = [&](double v) { return h - m - (v - y0) / (y1 - y0) * (h - 2 * m); };
  char buf[160];
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"320\" viewBox=\"0 0 480 320\">\n";
  out += "<rect width=\"480\" height=\"320\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", m, h - m, w - m,
                h - m);
  out += buf;
  std::snprintf(buf, sizeof buf, "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", m, m, m, h - m);
  out += buf;
  out += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.3f,%.3f", i ? " " : "", px(x[i]), py(y[i]));
    out += buf;
  }
  out += "\"/>\n";
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"3\" fill=\"steelblue\"/>\n", px(x[i]), py(y[i]));
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">%s</text>\n", w / 2, h - 12,
                x_label.c_str());
  out += buf;
  std::snprintf(buf, sizeof buf, "<text x=\"14\" y=\"%g\" transform=\"rotate(-90 14 %g)\" text-anchor=\"middle\">%s</text>\n",
                h / 2, h / 2, y_label.c_str());
  out += buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"10\">%.3g</text>\n", m, h - m + 14, x0);
  out += buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"10\" text-anchor=\"end\">%.3g</text>\n", w - m,
                h - m + 14, x1);
  out += buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"10\" text-anchor=\"end\">%.3g</text>\n", m - 4,
                m + 4, y1);
  out += buf;
  out += "</svg>\n";
  return out;
}

bool CheckReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string CheckReport::csv() const {
  std::string out = "check,module,map,value,bound,status,detail\n";
  for (const auto& c : checks) {
    out += c.name + "," + c.module + ",\"" + c.map + "\"," + fmt17(c.value) + "," + fmt17(c.bound) + "," +
           (c.passed ? "pass" : "fail") + ",\"" + c.detail + "\"\n";
  }
  return out;
}

CheckReport verify(const ExperimentConfig& config) {
  config.validate();
  CheckReport report;
  const std::vector<std::string> specs = config.map_given ? std::vector<std::string>{config.map} : builtin_map_specs();

  auto attempt = [&](const std::string& name, const std::string& module, const std::string& map_id, auto&& body) {
    CheckResult r;
    r.name = name;
    r.module = module;
    r.map = map_id;
    try {
      body(r);
    } catch (const LabError& e) {
      r.passed = false;
      r.module = e.module();
      r.detail = e.what();
    }
    report.checks.push_back(std::move(r));
  };

  for (const std::string& text : specs) {
    const MapSpec spec = parse_map_spec(text);
    std::shared_ptr<const ExpandingMap> map;
    attempt("build", "dynamics-core", spec.canonical(), [&](CheckResult& r) {
      map = std::make_shared<const ExpandingMap>(build_markov_map(spec));
      r.value = map->min_conorm();
      r.bound = 1.0;
      r.passed = r.value > r.bound;
    });
    if (!map) continue;
    const std::string id = spec.canonical();
    const Potential phi = test_potential(map->dimension());

    attempt("conjugacy_invariance", "pressure", id, [&](CheckResult& r) {
      const Homeomorphism h = check_homeomorphism(*map);
      const ExpandingMap g = conjugated_map(*map, h);
      ConjugacyOptions opts;
      opts.depth = depth_within(*map, 1 << 16, 12);
      const ConjugacyCheck c = conjugate_pressure_check(*map, g, h.forward, phi, opts);
      r.value = std::abs(c.difference);
      r.bound = c.bound;
      r.passed = c.passed();
      r.detail = "depth=" + std::to_string(opts.depth) + " equivariance=" + fmt17(c.equivariance_residual);
    });

    attempt("variational_gap", "pressure", id, [&](CheckResult& r) {
      const PressureEstimate est = limit_or_partial(*map, phi);
      const int period = depth_within(*map, 4096, 6);
      r.value = std::numeric_limits<double>::infinity();
      for (const Word& w : primitive_cycles(map->adjacency(), period)) {
        r.value = std::min(r.value, variational_gap(*map, phi, w, est.value));
      }
      r.bound = -1e-6 - est.residual;
      r.passed = r.value >= r.bound;
      r.detail = "max_period=" + std::to_string(period) + " residual=" + fmt17(est.residual);
    });

    attempt("lipschitz_continuity", "pressure", id, [&](CheckResult& r) {
      constexpr double eps = 0.5;
      const Potential psi = test_perturbation(map->dimension());
      const PressureEstimate a = limit_or_partial(*map, phi);
      const PressureEstimate b = limit_or_partial(*map, phi.plus(psi, eps));
      r.value = std::abs(a.value - b.value);
      r.bound = eps * psi.sup_norm() + a.residual + b.residual + 1e-9;
      r.passed = r.value <= r.bound;
    });

    attempt("monotonicity", "pressure", id, [&](CheckResult& r) {
      const int n = depth_within(*map, 1 << 16, 12);
      const SingularLeaves leaves = singular_leaves(*map, n, n);
      const double bound = -std::log(map->min_conorm()) + 1e-6;
      r.value = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < 9; ++i) {
        const double t0 = 0.25 * i, t1 = 0.25 * (i + 1);
        const double slope = (leaves.pressure(Potential::Kind::singular_lower, t1) -
                              leaves.pressure(Potential::Kind::singular_lower, t0)) /
                             (t1 - t0);
        r.value = std::max(r.value, slope);
      }
      r.bound = bound;
      r.passed = r.value <= r.bound;
    });

    if (!is_perturbable(spec)) continue;
    for (double eps : config.eps_schedule) {
      const std::string tag = id + " eps=" + fmt17(eps);
      std::shared_ptr<const RandomFamily> fam;
      attempt("perturbation_certificate", "random-bundle", tag, [&](CheckResult& r) {
        fam = std::make_shared<const RandomFamily>(RandomFamily::create(spec, eps, config.alphabet));
        r.value = fam->min_fiber_conorm();
        r.bound = fam->expansion_certificate();
        r.passed = r.value >= r.bound;
      });
      if (!fam) continue;
      constexpr int n = 6;
      const int depth = std::max(n + 4, static_cast<int>(std::ceil(std::log(1e-12) / std::log(fam->gamma()))));
      const BaseSample omega = sample_base(config.seed, depth + n + 2, config.alphabet);
      const FiberConjugacy conj = build_conjugacy(*fam, omega, depth);

      attempt("random_conjugacy", "random-bundle", tag, [&](CheckResult& r) {
        const RandomConjugacyCheck c = random_conjugacy_pressure_check(*fam, conj, phi, n);
        r.value = c.difference;
        r.bound = c.bound;
        r.passed = c.passed();
      });
      attempt("equivariance", "random-bundle", tag, [&](CheckResult& r) {
        r.value = conj.equivariance_residual(admissible_words(fam->base_map().adjacency(), n));
        r.bound = 2.0 * conj.error_bound;
        r.passed = r.value <= r.bound;
      });
      attempt("distortion", "random-bundle", tag, [&](CheckResult& r) {
        const DistortionReport d = distortion_constants(*fam, omega, 10000, config.r0);
        r.value = d.worst_violation;
        r.bound = -1e-10;
        r.passed = r.value >= r.bound;
        r.detail = "K=" + fmt17(d.k) + " r0=" + fmt17(d.r0);
      });
      attempt("expansivity", "random-bundle", tag, [&](CheckResult& r) {
        r.value = expansivity_min_growth(*fam, omega, 8);
        r.bound = 0.0;
        r.passed = r.value > r.bound;
      });
    }
  }
  return report;
}

RunRecord run(const ExperimentConfig& config) {
  config.validate();
  RunRecord rec;
  rec.config_hash = fnv1a(config.canonical());
  rec.timestamp = utc_timestamp();
  rec.versions = {{"pressurelab", kVersion},
                  {"compiler", __VERSION__},
                  {"openmp", std::to_string(_OPENMP)},
                  {"threads", std::to_string(omp_get_max_threads())}};
  const fs::path out(config.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) config_error("cannot create output directory '" + config.out + "': " + ec.message());

  std::string csv, certificates;
  auto stage = [&](const std::string& name, auto&& body) {
    try {
      body();
      return true;
    } catch (const LabError& e) {
      rec.errors.push_back(name + ": " + e.what());
      return false;
    }
  };
  auto add = [&](const std::string& key, const std::string& value) { rec.summary.emplace_back(key, value); };

  const MapSpec spec = parse_map_spec(config.map);
  std::shared_ptr<const ExpandingMap> map;
  if (config.mode != Mode::checks) {
    stage("map", [&] {
      map = std::make_shared<const ExpandingMap>(build_markov_map(spec));
      certificates = map_certificate(*map);
    });
  }

  switch (config.mode) {
    case Mode::dimension: {
      csv = DimensionReport::csv_header() + "\n";
      if (!map) break;
      stage("dimension", [&] {
        const DimensionReport rep = dimension_report(*map, config.depth, config.tol);
        csv += rep.csv_row() + "\n";
        add("t_lower", fmt17(rep.t_lower));
        add("t_upper", fmt17(rep.t_upper));
        if (rep.t_root) add("t_root", fmt17(*rep.t_root));
      });
      break;
    }
    case Mode::pressure: {
      csv = PressureEstimate::csv_header() + "\n";
      if (!map) break;
      stage("pressure", [&] {
        const Potential pot = parse_potential(config.potential, map->dimension());
        PressureEstimate est;
        try {
          if (pot.is_additive()) {
            LimitOptions opts;
            opts.max_depth = config.max_depth;
            est = pressure_limit(*map, pot, config.tol, opts);
          } else {
            est = pressure_subadditive(*map, pot, {1, 2, 4}, config.tol);
          }
        } catch (const NoConvergenceError& e) {
          csv += e.partial().csv_row() + "\n";
          throw;
        }
        csv += est.csv_row() + "\n";
        add("pressure", fmt17(est.value));
        add("residual", fmt17(est.residual));
        if (est.advisory) add("advisory", "non-conformal map");
        for (const auto& [n, v] : est.per_depth_values) certificates += "raw_value.n" + std::to_string(n) + "=" + fmt17(v) + "\n";
        if (pot.is_additive()) {
          const int n = std::min(config.depth, depth_within(*map, 1 << 20, config.depth));
          const CachedCylinders cyl = cached_cylinders(*map, n);
          std::vector<double> sums;
          sums.reserve(cyl.points.size());
          for (std::size_t i = 0; i < cyl.points.size(); ++i) {
            Point x = cyl.points[i];
            double s = 0.0;
            for (int k = 0; k < n; ++k) {
              const int b = cyl.words[i][static_cast<std::size_t>(k)];
              s += pot.evaluate(*map, b, x);
              x = map->branch(b).forward(x);
            }
            sums.push_back(s);
          }
          add("depth", std::to_string(n));
          add("depth_value", fmt17(kernels::log_sum_exp(sums) / n));
        }
      });
      break;
    }
    case Mode::lyapunov: {
      csv = "measure_tag,lambda_1,lambda_m,length\n";
      if (!map) break;
      stage("lyapunov", [&] {
        ConformalityOptions opts;
        opts.seed = config.seed;
        const int period = std::max(3, depth_within(*map, 4096, 8));
        const ConformalityReport rep = average_conformal_check(*map, period, config.seeds, opts);
        csv = rep.csv();
        add("max_spread", fmt17(rep.max_spread));
        add("min_exponent", fmt17(rep.min_exponent));
        add("verdict", rep.verdict == ConformalityVerdict::conformal_like ? "conformal_like" : "spread_detected");
      });
      break;
    }
    case Mode::entropy: {
      csv = "epsilon,entropy,std_err,n,seeds\n";
      if (!map) break;
      std::vector<std::uint64_t> seeds;
      for (int i = 0; i < config.seeds; ++i) seeds.push_back(config.seed + static_cast<std::uint64_t>(i));
      for (double eps : config.eps_schedule) {
        stage("entropy eps=" + fmt17(eps), [&] {
          if (eps == 0.0) {
            LimitOptions opts;
            opts.max_depth = config.max_depth;
            const PressureEstimate est = pressure_limit(*map, Potential::zero(), config.tol, opts);
            csv += fmt17(eps) + "," + fmt17(est.value) + ",0," + std::to_string(est.depth) + ",0\n";
            add("entropy", fmt17(est.value));
            return;
          }
          const RandomFamily fam = RandomFamily::create(spec, eps, config.alphabet);
          const RandomPressureEstimate est = random_pressure(fam, Potential::zero(), seeds, config.depth);
          csv += fmt17(eps) + "," + fmt17(est.value) + "," + fmt17(est.std_error) + "," + std::to_string(est.n) + "," +
                 std::to_string(est.omega_samples) + "\n";
          add("entropy", fmt17(est.value));
        });
      }
      break;
    }
    case Mode::stability: {
      csv = StabilityTable::csv_header() + "\n";
      if (!map) break;
      stage("stability", [&] {
        StabilityOptions opts;
        opts.seeds = config.seeds;
        opts.first_seed = config.seed;
        opts.alphabet = config.alphabet;
        opts.r0 = config.r0;
        const StabilityTable table = stability_experiment(spec, config.eps_schedule, config.depth, config.tol, opts);
        csv = table.csv();
        certificates += table.certificates_text();
        for (const auto& e : table.errors) rec.errors.push_back("stability: " + e);
        std::vector<double> xs, ys;
        for (const auto& row : table.rows) {
          xs.push_back(row.epsilon);
          ys.push_back(row.gap_t);
        }
        write_file(out / "gaps.svg", svg_line_plot(xs, ys, "epsilon", "|t_root - t0|"));
        rec.files.push_back("gaps.svg");
        if (!table.rows.empty()) {
          add("t0", fmt17(table.rows.back().t0));
          add("t_root", fmt17(table.rows.back().t_root));
          add("s_root", fmt17(table.rows.back().s_root));
          add("gap_t", fmt17(table.rows.back().gap_t));
        }
      });
      break;
    }
    case Mode::checks: {
      CheckReport report;
      stage("checks", [&] { report = verify(config); });
      csv = report.csv();
      int failed = 0;
      for (const auto& c : report.checks) {
        if (!c.passed) {
          ++failed;
          rec.errors.push_back("check " + c.name + " [" + c.module + "] on " + c.map + ": " +
                               (c.detail.empty() ? fmt17(c.value) + " vs " + fmt17(c.bound) : c.detail));
        }
      }
      add("checks", std::to_string(report.checks.size()));
      add("failed", std::to_string(failed));
      break;
    }
  }

  write_file(out / "run.csv", csv);
  write_file(out / "certificates.txt", certificates);
  rec.files.insert(rec.files.begin(), {"run.csv", "certificates.txt"});
  rec.files.push_back("record.txt");
  write_file(out / "record.txt", rec.text());
  return rec;
}

}  // namespace pressurelab
