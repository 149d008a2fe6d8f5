#include "pressurelab/map_families.hpp"

#include <charconv>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include "pressurelab/errors.hpp"

namespace pressurelab {

namespace {

constexpr const char* kModule = "dynamics-core";
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double parse_double(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto* first = value.data();
  const auto* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw LabError(ErrorKind::BadSpec, kModule,
                   "value of '" + std::string(key) + "' is not a number: " + std::string(value));
  }
  return out;
}

int parse_int(std::string_view key, double v) {
  if (v != std::floor(v) || std::abs(v) > 1e6) {
    throw LabError(ErrorKind::BadSpec, kModule, "value of '" + std::string(key) + "' must be an integer");
  }
  return static_cast<int>(v);
}

void require_keys(const MapSpec& spec, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : spec.params) {
    bool ok = key == "alpha";
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) {
      throw LabError(ErrorKind::BadSpec, kModule,
                     "unknown key '" + key + "' for family '" + spec.family + "'");
    }
  }
}

Mat2 inverse(const Mat2& m) {
  const double det = m.det();
  return {m.d / det, -m.b / det, -m.c / det, m.a / det};
}

/// Empirical Holder (alpha = 1) constant of the derivative over a 1D piece.
double sampled_derivative_lipschitz(const std::function<Mat2(const Point&)>& df, Interval dom) {
  constexpr int kSamples = 512;
  double k = 0.0;
  double prev_x = dom.lo;
  double prev_d = df({prev_x, 0.0}).a;
  for (int i = 1; i <= kSamples; ++i) {
    const double x = dom.lo + dom.length() * i / (kSamples + 1.0);
    const double d = df({x, 0.0}).a;
    k = std::max(k, std::abs(d - prev_d) / (x - prev_x));
    prev_x = x;
    prev_d = d;
  }
  return k;
}

}  // namespace

bool MapSpec::has(std::string_view key) const {
  for (const auto& kv : params) {
    if (kv.first == key) return true;
  }
  return false;
}

double MapSpec::number(std::string_view key, double fallback) const {
  for (const auto& [k, v] : params) {
    if (k == key) return parse_double(k, v);
  }
  return fallback;
}

double MapSpec::number(std::string_view key) const {
  for (const auto& [k, v] : params) {
    if (k == key) return parse_double(k, v);
  }
  throw LabError(ErrorKind::BadSpec, kModule,
                 "family '" + family + "' requires key '" + std::string(key) + "'");
}

std::string MapSpec::text(std::string_view key) const {
  for (const auto& [k, v] : params) {
    if (k == key) return v;
  }
  throw LabError(ErrorKind::BadSpec, kModule,
                 "family '" + family + "' requires key '" + std::string(key) + "'");
}

std::string MapSpec::canonical() const {
  std::string out = "family=" + family;
  for (const auto& [k, v] : params) out += " " + k + "=" + v;
  return out;
}

MapSpec parse_map_spec(std::string_view text) {
  MapSpec spec;
  std::istringstream in{std::string(text)};
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == token.size()) {
      throw LabError(ErrorKind::BadSpec, kModule, "expected key=value, got '" + token + "'");
    }
    std::string key = token.substr(0, eq);
    std::string value = token.substr(eq + 1);
    if (key == "family") {
      if (!spec.family.empty()) throw LabError(ErrorKind::BadSpec, kModule, "family given twice");
      spec.family = std::move(value);
    } else {
      if (spec.has(key)) throw LabError(ErrorKind::BadSpec, kModule, "key '" + key + "' given twice");
      spec.params.emplace_back(std::move(key), std::move(value));
    }
  }
  if (spec.family.empty()) throw LabError(ErrorKind::BadSpec, kModule, "map spec names no family");
  return spec;
}

ExpandingMap build_markov_map(std::string_view text) { return build_markov_map(parse_map_spec(text)); }

ExpandingMap build_markov_map(const MapSpec& spec) {
  const double alpha = spec.number("alpha", 1.0);
  const std::string id = spec.canonical();
  const std::string& f = spec.family;
  if (f == "doubling") {
    require_keys(spec, {});
    return make_circle_map(2, 0.0, alpha, id);
  }
  if (f == "cookie_cutter") {
    require_keys(spec, {"r1", "r2"});
    return make_cookie_cutter(spec.number("r1"), spec.number("r2"), alpha, id);
  }
  if (f == "circle") {
    require_keys(spec, {"degree", "amp"});
    return make_circle_map(parse_int("degree", spec.number("degree", 2.0)), spec.number("amp", 0.0), alpha, id);
  }
  if (f == "golden_mean") {
    require_keys(spec, {});
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    return make_affine_markov({{{0.0, g}, 0.0, 1.0}, {{g, 1.0}, 0.0, g}}, alpha, id);
  }
  if (f == "affine") {
    require_keys(spec, {"branches"});
    // branches=lo:hi->c:d;lo:hi->c:d
    std::vector<AffinePiece> pieces;
    std::string all = spec.text("branches");
    std::size_t start = 0;
    while (start <= all.size()) {
      const auto end = std::min(all.find(';', start), all.size());
      const std::string piece = all.substr(start, end - start);
      const auto arrow = piece.find("->");
      const auto c1 = piece.find(':');
      const auto c2 = piece.find(':', arrow == std::string::npos ? 0 : arrow);
      if (arrow == std::string::npos || c1 > arrow || c2 == std::string::npos) {
        throw LabError(ErrorKind::BadSpec, kModule, "affine branch must read lo:hi->c:d, got '" + piece + "'");
      }
      AffinePiece p;
      p.domain.lo = parse_double("branches", piece.substr(0, c1));
      p.domain.hi = parse_double("branches", piece.substr(c1 + 1, arrow - c1 - 1));
      p.image_at_lo = parse_double("branches", piece.substr(arrow + 2, c2 - arrow - 2));
      p.image_at_hi = parse_double("branches", piece.substr(c2 + 1));
      pieces.push_back(p);
      start = end + 1;
    }
    return make_affine_markov(pieces, alpha, id);
  }
  if (f == "toral") {
    require_keys(spec, {"a11", "a12", "a21", "a22"});
    const Mat2 a{static_cast<double>(parse_int("a11", spec.number("a11"))),
                 static_cast<double>(parse_int("a12", spec.number("a12"))),
                 static_cast<double>(parse_int("a21", spec.number("a21"))),
                 static_cast<double>(parse_int("a22", spec.number("a22")))};
    return make_toral(a, id);
  }
  if (f == "toral_conformal") {
    require_keys(spec, {"a", "b"});
    const int a = parse_int("a", spec.number("a")), b = parse_int("b", spec.number("b", 0.0));
    return make_toral(Mat2{double(a), double(-b), double(b), double(a)}, id);
  }
  if (f == "toral_diag") {
    require_keys(spec, {"d1", "d2"});
    const int d1 = parse_int("d1", spec.number("d1")), d2 = parse_int("d2", spec.number("d2"));
    return make_toral(Mat2{double(d1), 0.0, 0.0, double(d2)}, id);
  }
  throw LabError(ErrorKind::BadSpec, kModule, "unknown map family '" + f + "'");
}

double solve_increasing(const std::function<double(double)>& fn,
                        const std::function<double(double)>& derivative,
                        double target, double lo, double hi) {
  double flo = fn(lo) - target;
  double fhi = fn(hi) - target;
  if (flo >= 0.0) return lo;
  if (fhi <= 0.0) return hi;
  double u = lo + (hi - lo) * (-flo) / (fhi - flo);
  for (int iter = 0; iter < 200; ++iter) {
    const double fu = fn(u) - target;
    if (fu == 0.0) return u;
    if (fu > 0.0) hi = u; else lo = u;
    double next = u - fu / derivative(u);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - u) <= 1e-17 + 2e-16 * std::abs(u) || hi - lo <= 4e-16 * std::max(1.0, std::abs(u))) {
      return next;
    }
    u = next;
  }
  return u;
}

namespace {

// Image coordinate in [0, 1]. Points already there are kept, so that an
// inverse image that rounded up to 1 stays at the right end of the image.
double unit_coordinate(double x) { return (x >= 0.0 && x <= 1.0) ? x : x - std::floor(x); }

}  // namespace

ExpandingMap make_circle_map(int degree, double amplitude, double alpha, std::string id) {
  if (degree < 2) throw LabError(ErrorKind::NonExpanding, kModule, "circle map degree must be >= 2");
  if (id.empty()) {
    std::ostringstream s;
    s << "family=circle degree=" << degree << " amp=" << amplitude;
    id = s.str();
  }
  const double n = degree;
  const double amp = amplitude;
  if (!(n - kTwoPi * std::abs(amp) > 0.0)) {
    throw LabError(ErrorKind::NonExpanding, kModule, "circle map lift is not monotone");
  }
  auto lift = [n, amp](double x) { return n * x + amp * std::sin(kTwoPi * x); };
  auto lift_prime = [n, amp](double x) { return n + kTwoPi * amp * std::cos(kTwoPi * x); };

  auto breaks = std::make_shared<std::vector<double>>();
  for (int j = 0; j <= degree; ++j) {
    if (j == 0) breaks->push_back(0.0);
    else if (j == degree) breaks->push_back(1.0);
    else if (amp == 0.0) breaks->push_back(j / n);
    else breaks->push_back(solve_increasing(lift, lift_prime, j, (*breaks)[j - 1], 1.0));
  }

  ExpandingMap::Parts parts;
  parts.id = std::move(id);
  parts.ambient = Ambient::circle;
  parts.holder_exponent = alpha;
  parts.domain_description = "circle [0,1) with lifted branches";
  for (int j = 0; j < degree; ++j) {
    BranchSpec br;
    br.domain = {(*breaks)[j], (*breaks)[j + 1]};
    br.image = {0.0, 1.0};
    const double shift = j;
    br.forward = [lift, shift](const Point& p) {
      const double v = lift(p.x) - shift;
      return Point{v - std::floor(v), 0.0};
    };
    if (amp == 0.0) {
      br.inverse = [n, shift](const Point& p) { return Point{(unit_coordinate(p.x) + shift) / n, 0.0}; };
    } else {
      const Interval dom = br.domain;
      br.inverse = [lift, lift_prime, shift, dom](const Point& p) {
        const double z = unit_coordinate(p.x);
        return Point{solve_increasing(lift, lift_prime, z + shift, dom.lo, dom.hi), 0.0};
      };
    }
    br.derivative = [lift_prime](const Point& p) { return Mat2::scalar(lift_prime(p.x)); };
    br.derivative_holder_constant = kTwoPi * kTwoPi * std::abs(amp);
    br.seed = {br.domain.center(), 0.0};
    parts.branches.push_back(std::move(br));
  }
  parts.locate = [breaks](const Point& p) {
    const double x = p.x - std::floor(p.x);
    const auto& b = *breaks;
    for (std::size_t j = 0; j + 1 < b.size(); ++j) {
      if (x >= b[j] && x < b[j + 1]) return static_cast<int>(j);
    }
    return static_cast<int>(b.size()) - 2;
  };
  return ExpandingMap::create(std::move(parts));
}

ExpandingMap make_doubling() { return make_circle_map(2, 0.0, 1.0, "family=doubling"); }

ExpandingMap make_cookie_cutter(double r1, double r2, double alpha, std::string id) {
  if (id.empty()) {
    std::ostringstream s;
    s << "family=cookie_cutter r1=" << r1 << " r2=" << r2;
    id = s.str();
  }
  if (!(r1 > 0.0 && r2 > 0.0)) throw LabError(ErrorKind::BadSpec, kModule, "cookie-cutter slopes must be positive");
  ExpandingMap::Parts parts;
  parts.id = std::move(id);
  parts.ambient = Ambient::interval;
  parts.holder_exponent = alpha;
  parts.domain_description = "two subintervals of [0,1]";

  BranchSpec left;
  left.domain = {0.0, 1.0 / r1};
  left.image = {0.0, 1.0};
  left.forward = [r1](const Point& p) { return Point{r1 * p.x, 0.0}; };
  left.inverse = [r1](const Point& p) { return Point{p.x / r1, 0.0}; };
  left.derivative = [r1](const Point&) { return Mat2::scalar(r1); };
  left.seed = {left.domain.center(), 0.0};

  BranchSpec right;
  const double shift = r2 - 1.0;
  right.domain = {1.0 - 1.0 / r2, 1.0};
  right.image = {0.0, 1.0};
  right.forward = [r2, shift](const Point& p) { return Point{r2 * p.x - shift, 0.0}; };
  right.inverse = [r2, shift](const Point& p) { return Point{(p.x + shift) / r2, 0.0}; };
  right.derivative = [r2](const Point&) { return Mat2::scalar(r2); };
  right.seed = {right.domain.center(), 0.0};

  const Interval d0 = left.domain, d1 = right.domain;
  parts.branches = {std::move(left), std::move(right)};
  parts.locate = [d0, d1](const Point& p) {
    if (p.x >= d0.lo && p.x <= d0.hi) return 0;
    if (p.x >= d1.lo && p.x <= d1.hi) return 1;
    return -1;
  };
  return ExpandingMap::create(std::move(parts));
}

ExpandingMap make_affine_markov(const std::vector<AffinePiece>& pieces, double alpha, std::string id) {
  if (id.empty()) id = "family=affine";
  ExpandingMap::Parts parts;
  parts.id = std::move(id);
  parts.ambient = Ambient::interval;
  parts.holder_exponent = alpha;
  parts.domain_description = "affine Markov pieces";
  auto domains = std::make_shared<std::vector<Interval>>();
  for (const auto& piece : pieces) {
    if (!(piece.domain.hi > piece.domain.lo)) {
      throw LabError(ErrorKind::BadSpec, kModule, "affine piece has an empty domain");
    }
    const double lo = piece.domain.lo, c = piece.image_at_lo;
    const double slope = (piece.image_at_hi - piece.image_at_lo) / piece.domain.length();
    if (slope == 0.0) throw LabError(ErrorKind::NonExpanding, kModule, "affine piece is constant");
    BranchSpec br;
    br.domain = piece.domain;
    br.image = {std::min(piece.image_at_lo, piece.image_at_hi), std::max(piece.image_at_lo, piece.image_at_hi)};
    br.forward = [lo, c, slope](const Point& p) { return Point{c + slope * (p.x - lo), 0.0}; };
    br.inverse = [lo, c, slope](const Point& p) { return Point{lo + (p.x - c) / slope, 0.0}; };
    br.derivative = [slope](const Point&) { return Mat2::scalar(slope); };
    br.seed = {piece.domain.center(), 0.0};
    domains->push_back(piece.domain);
    parts.branches.push_back(std::move(br));
  }
  parts.locate = [domains](const Point& p) {
    for (std::size_t i = 0; i < domains->size(); ++i) {
      if (p.x >= (*domains)[i].lo && p.x <= (*domains)[i].hi) return static_cast<int>(i);
    }
    return -1;
  };
  return ExpandingMap::create(std::move(parts));
}

ExpandingMap make_golden_mean() { return build_markov_map("family=golden_mean"); }

ExpandingMap make_toral(const Mat2& a, std::string id) {
  if (id.empty()) {
    std::ostringstream s;
    s << "family=toral a11=" << a.a << " a12=" << a.b << " a21=" << a.c << " a22=" << a.d;
    id = s.str();
  }
  const long long a11 = std::llround(a.a), a12 = std::llround(a.b), a21 = std::llround(a.c), a22 = std::llround(a.d);
  const long long det = a11 * a22 - a12 * a21;
  if (std::llabs(det) < 2) {
    throw LabError(ErrorKind::NonExpanding, kModule, "toral endomorphism must have |det| >= 2");
  }
  const bool monomial = (a12 == 0 && a21 == 0) || (a11 == 0 && a22 == 0);
  if (!monomial) {
    throw LabError(ErrorKind::BadSpec, kModule,
                   "toral maps need a diagonal or anti-diagonal integer matrix (box-shaped Markov pieces)");
  }
  // A maps the unit square onto an integer box; its unit cells Q + k give the
  // digits, so every piece A^-1 (Q + k) sits inside Q and cylinders nest.
  const double xs[] = {0.0, a.a, a.b, a.a + a.b};
  const double ys[] = {0.0, a.c, a.d, a.c + a.d};
  const long long x0 = std::llround(*std::min_element(std::begin(xs), std::end(xs)));
  const long long x1 = std::llround(*std::max_element(std::begin(xs), std::end(xs)));
  const long long y0 = std::llround(*std::min_element(std::begin(ys), std::end(ys)));
  const long long y1 = std::llround(*std::max_element(std::begin(ys), std::end(ys)));
  auto reps = std::make_shared<std::vector<std::pair<long long, long long>>>();
  for (long long kx = x0; kx < x1; ++kx) {
    for (long long ky = y0; ky < y1; ++ky) reps->emplace_back(kx, ky);
  }
  if (static_cast<long long>(reps->size()) != std::llabs(det)) {
    throw LabError(ErrorKind::BadSpec, kModule, "failed to enumerate digits");
  }
  const Mat2 ai = inverse(a);

  ExpandingMap::Parts parts;
  parts.id = std::move(id);
  parts.ambient = Ambient::torus;
  parts.holder_exponent = 1.0;
  parts.domain_description = "2-torus, pieces are the boxes A^-1 (Q + k) for unit cells Q + k of A Q";
  for (const auto& [kx, ky] : *reps) {
    BranchSpec br;
    const Point r{static_cast<double>(kx), static_cast<double>(ky)};
    br.forward = [a](const Point& p) { return wrap(Ambient::torus, a * p); };
    br.inverse = [ai, r](const Point& p) {
      const Point z = wrap(Ambient::torus, p);
      return ai * Point{z.x + r.x, z.y + r.y};
    };
    br.derivative = [a](const Point&) { return a; };
    br.seed = br.inverse({0.5, 0.5});
    parts.branches.push_back(std::move(br));
  }
  // A cell k and floor(A p) name the same piece when they agree mod A Z^2.
  auto reduce = [a11, a12, a21, a22, det](long long kx, long long ky) {
    auto floor_div = [](long long num, long long den) {
      long long q = num / den;
      if ((num % den != 0) && ((num < 0) != (den < 0))) --q;
      return q;
    };
    const long long q1 = floor_div(a22 * kx - a12 * ky, det);
    const long long q2 = floor_div(-a21 * kx + a11 * ky, det);
    return std::pair<long long, long long>{kx - (a11 * q1 + a12 * q2), ky - (a21 * q1 + a22 * q2)};
  };
  auto classes = std::make_shared<std::vector<std::pair<long long, long long>>>();
  for (const auto& [kx, ky] : *reps) classes->push_back(reduce(kx, ky));
  parts.locate = [a11, a12, a21, a22, reduce, classes](const Point& p0) {
    const Point p = wrap(Ambient::torus, p0);
    const long long kx = static_cast<long long>(std::floor(a11 * p.x + a12 * p.y));
    const long long ky = static_cast<long long>(std::floor(a21 * p.x + a22 * p.y));
    const auto c = reduce(kx, ky);
    for (std::size_t i = 0; i < classes->size(); ++i) {
      if ((*classes)[i] == c) return static_cast<int>(i);
    }
    return -1;
  };
  return ExpandingMap::create(std::move(parts));
}

ExpandingMap make_toral_conformal(int a, int b) {
  std::ostringstream s;
  s << "family=toral_conformal a=" << a << " b=" << b;
  return make_toral(Mat2{double(a), double(-b), double(b), double(a)}, s.str());
}

ExpandingMap make_toral_diag(int d1, int d2) {
  std::ostringstream s;
  s << "family=toral_diag d1=" << d1 << " d2=" << d2;
  return make_toral(Mat2{double(d1), 0.0, 0.0, double(d2)}, s.str());
}

Homeomorphism sine_circle_homeomorphism(double a) {
  if (!(std::abs(a) < 1.0)) throw LabError(ErrorKind::BadSpec, kModule, "homeomorphism amplitude must be < 1");
  auto h = [a](double x) { return x + a * std::sin(kTwoPi * x) / kTwoPi; };
  auto dh = [a](double x) { return 1.0 + a * std::cos(kTwoPi * x); };
  Homeomorphism out;
  out.forward = [h](const Point& p) {
    const double x = p.x - std::floor(p.x);
    const double v = h(x);
    return Point{v - std::floor(v), 0.0};
  };
  out.inverse = [h, dh](const Point& p) {
    const double z = p.x - std::floor(p.x);
    return Point{solve_increasing(h, dh, z, 0.0, 1.0), 0.0};
  };
  out.jacobian = [dh](const Point& p) { return Mat2::scalar(dh(p.x)); };
  out.lipschitz = 1.0 + std::abs(a);
  std::ostringstream s;
  s << "circle_sine(" << a << ")";
  out.description = s.str();
  return out;
}

Homeomorphism sine_interval_homeomorphism(double a) {
  if (!(std::abs(a) < 1.0)) throw LabError(ErrorKind::BadSpec, kModule, "homeomorphism amplitude must be < 1");
  constexpr double kPi = std::numbers::pi;
  auto h = [a](double x) { return x + a * std::sin(kPi * x) / kPi; };
  auto dh = [a](double x) { return 1.0 + a * std::cos(kPi * x); };
  Homeomorphism out;
  out.forward = [h](const Point& p) { return Point{h(p.x), 0.0}; };
  out.inverse = [h, dh](const Point& p) { return Point{solve_increasing(h, dh, p.x, 0.0, 1.0), 0.0}; };
  out.jacobian = [dh](const Point& p) { return Mat2::scalar(dh(p.x)); };
  out.lipschitz = 1.0 + std::abs(a);
  std::ostringstream s;
  s << "interval_sine(" << a << ")";
  out.description = s.str();
  return out;
}

Homeomorphism torus_shear_homeomorphism(double a) {
  Homeomorphism out;
  out.forward = [a](const Point& p) {
    return wrap(Ambient::torus, {p.x + a * std::sin(kTwoPi * p.y) / kTwoPi, p.y});
  };
  out.inverse = [a](const Point& p) {
    return wrap(Ambient::torus, {p.x - a * std::sin(kTwoPi * p.y) / kTwoPi, p.y});
  };
  out.jacobian = [a](const Point& p) { return Mat2{1.0, a * std::cos(kTwoPi * p.y), 0.0, 1.0}; };
  out.lipschitz = 1.0 + std::abs(a);
  std::ostringstream s;
  s << "torus_shear(" << a << ")";
  out.description = s.str();
  return out;
}

Homeomorphism identity_homeomorphism() {
  Homeomorphism out;
  out.forward = [](const Point& p) { return p; };
  out.inverse = [](const Point& p) { return p; };
  out.jacobian = [](const Point&) { return Mat2::identity(); };
  out.description = "identity";
  return out;
}

ExpandingMap conjugated_map(const ExpandingMap& f, const Homeomorphism& h) {
  auto base = std::make_shared<const ExpandingMap>(f);
  ExpandingMap::Parts parts;
  parts.id = f.id() + " conj=" + h.description;
  parts.ambient = f.ambient();
  parts.holder_exponent = f.holder_exponent();
  parts.adjacency = f.adjacency();
  parts.domain_description = f.domain_description() + " transported by " + h.description;
  for (int b = 0; b < f.branch_count(); ++b) {
    const BranchSpec& src = f.branch(b);
    BranchSpec br;
    if (f.ambient() != Ambient::torus) {
      br.domain = {h.forward({src.domain.lo, 0.0}).x, src.domain.hi >= 1.0 ? 1.0 : h.forward({src.domain.hi, 0.0}).x};
      br.image = {h.forward({src.image.lo, 0.0}).x, src.image.hi >= 1.0 ? 1.0 : h.forward({src.image.hi, 0.0}).x};
    }
    br.forward = [base, b, h](const Point& y) {
      return h.forward(base->branch(b).forward(h.inverse(y)));
    };
    br.inverse = [base, b, h](const Point& z) {
      return h.forward(base->branch(b).inverse(h.inverse(z)));
    };
    br.derivative = [base, b, h](const Point& y) {
      const Point u = h.inverse(y);
      const BranchSpec& s = base->branch(b);
      return h.jacobian(s.forward(u)) * s.derivative(u) * inverse(h.jacobian(u));
    };
    if (f.ambient() == Ambient::torus) {
      br.seed = h.forward(src.seed);
      br.derivative_holder_constant = f.derivative_holder_constant();
    } else {
      br.seed = {br.domain.center(), 0.0};
      br.derivative_holder_constant = sampled_derivative_lipschitz(br.derivative, br.domain);
    }
    parts.branches.push_back(std::move(br));
  }
  parts.locate = [base, h](const Point& y) { return base->locate(h.inverse(y)); };
  return ExpandingMap::create(std::move(parts));
}

std::vector<std::string> builtin_map_specs() {
  return {
      "family=doubling",
      "family=cookie_cutter r1=3 r2=3",
      "family=cookie_cutter r1=2 r2=4",
      "family=circle degree=3 amp=0.1",
      "family=toral_conformal a=0 b=2",
      "family=toral_diag d1=2 d2=2",
  };
}

}  // namespace pressurelab
