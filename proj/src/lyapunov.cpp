#include "pressurelab/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "pressurelab/errors.hpp"
#include "pressurelab/symbolic.hpp"

namespace pressurelab {

namespace {

constexpr const char* kModule = "lyapunov";

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string word_tag(const Word& w) {
  std::string s = "periodic(";
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(w[i]);
  }
  return s + ")";
}

/// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0, carry = 0.0;
  void add(double v) {
    const double t = sum + v;
    carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

/// Accumulates exponents from a sequence of derivative matrices.
class QrAccumulator {
 public:
  void push(const Mat2& df) {
    const QrStep step = qr_decompose(df * q_);
    q_ = step.q;
    sum1_.add(std::log(std::abs(step.r11)));
    sum2_.add(std::log(std::abs(step.r22)));
    ++steps_;
  }
  std::vector<double> exponents(int dimension) const {
    if (dimension == 1) return {sum1_.value() / steps_};
    std::vector<double> e{sum1_.value() / steps_, sum2_.value() / steps_};
    std::sort(e.begin(), e.end());
    return e;
  }

 private:
  Mat2 q_{};
  CompensatedSum sum1_, sum2_;
  int steps_ = 0;
};

}  // namespace

std::string ConformalityReport::csv() const {
  std::string out = "measure_tag,lambda_1,lambda_m,length\n";
  for (const auto& s : samples) {
    out += s.measure_tag + "," + fmt17(s.exponents.front()) + "," + fmt17(s.exponents.back()) + "," +
           std::to_string(s.length) + "\n";
  }
  out += "summary," + fmt17(max_spread) + "," + fmt17(min_exponent) + "," +
         (verdict == ConformalityVerdict::conformal_like ? "conformal_like" : "spread_detected") + "\n";
  return out;
}

LyapunovSample lyapunov_exponents(const ExpandingMap& map, const Point& start, int n) {
  if (n < 32) throw LabError(ErrorKind::BadSpec, kModule, "orbit length must be >= 32");
  QrAccumulator acc;
  Point x = wrap(map.ambient(), start);
  for (int k = 0; k < n; ++k) {
    const int b = map.locate(x);
    if (b < 0) {
      std::ostringstream msg;
      msg << "orbit left the branch pieces at step " << k;
      throw LabError(ErrorKind::EscapedRepeller, kModule, msg.str());
    }
    acc.push(map.branch(b).derivative(x));
    x = map.branch(b).forward(x);
  }
  std::ostringstream tag;
  tag << "orbit(" << start.x << "," << start.y << ")";
  return {tag.str(), acc.exponents(map.dimension()), n};
}

LyapunovSample lyapunov_exponents(const ExpandingMap& map, const Word& periodic, int n) {
  const int p = static_cast<int>(periodic.size());
  ScaledProduct prod;
  std::vector<int> rot = periodic.symbols();
  for (int k = 0; k < p; ++k) {
    const Point xk = periodic_point(map, Word(rot));
    prod.left_multiply(map.branch(rot.front()).derivative(xk));
    std::rotate(rot.begin(), rot.begin() + 1, rot.end());
  }
  prod.renormalize();
  const Mat2& m = prod.matrix();
  std::vector<double> e;
  if (map.dimension() == 1) {
    e = {(prod.log_scale() + std::log(std::abs(m.a))) / p};
  } else {
    const double half_tr = 0.5 * (m.a + m.d);
    const double det = m.det();
    const double disc = half_tr * half_tr - det;
    double l1, l2;
    if (disc >= 0.0) {
      const double r = std::sqrt(disc);
      l1 = std::log(std::abs(half_tr - r));
      l2 = std::log(std::abs(half_tr + r));
    } else {
      l1 = l2 = 0.5 * std::log(std::abs(det));
    }
    e = {(prod.log_scale() + l1) / p, (prod.log_scale() + l2) / p};
    std::sort(e.begin(), e.end());
  }
  const int len = ((std::max(n, p) + p - 1) / p) * p;
  return {word_tag(periodic), e, len};
}

LyapunovSample birkhoff_exponents(const ExpandingMap& map, const Word& w, std::string tag) {
  const std::vector<int>& s = w.symbols();
  const std::size_t n = s.size();
  // Orbit points right to left: x_k = g_{s_k}(x_{k+1}).
  std::vector<Point> orbit(n);
  orbit[n - 1] = map.branch(s[n - 1]).seed;
  for (std::size_t k = n - 1; k-- > 0;) orbit[k] = map.branch(s[k]).inverse(orbit[k + 1]);
  QrAccumulator acc;
  for (std::size_t k = 0; k < n; ++k) acc.push(map.branch(s[k]).derivative(orbit[k]));
  return {std::move(tag), acc.exponents(map.dimension()), static_cast<int>(n)};
}

Word random_word(const ExpandingMap& map, int length, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> w;
  w.reserve(static_cast<std::size_t>(length));
  w.push_back(static_cast<int>(rng() % static_cast<std::uint64_t>(map.branch_count())));
  while (static_cast<int>(w.size()) < length) {
    std::vector<int> next;
    for (int b = 0; b < map.branch_count(); ++b) {
      if (map.transition(w.back(), b)) next.push_back(b);
    }
    w.push_back(next[rng() % next.size()]);
  }
  return Word(std::move(w));
}

ConformalityReport average_conformal_check(const ExpandingMap& map, int max_period, int birkhoff_samples,
                                           const ConformalityOptions& opts) {
  if (max_period < 3) throw LabError(ErrorKind::BadSpec, kModule, "max_period must be >= 3");
  const std::vector<Word> cycles = primitive_cycles(map.adjacency(), max_period);
  ConformalityReport rep;
  rep.threshold = opts.threshold;
  rep.samples.resize(cycles.size() + static_cast<std::size_t>(std::max(birkhoff_samples, 0)));
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < cycles.size(); ++i) {
    rep.samples[i] = lyapunov_exponents(map, cycles[i], 32);
  }
  for (int i = 0; i < birkhoff_samples; ++i) {
    const std::uint64_t seed = opts.seed + static_cast<std::uint64_t>(i);
    rep.samples[cycles.size() + static_cast<std::size_t>(i)] =
        birkhoff_exponents(map, random_word(map, opts.birkhoff_length, seed), "birkhoff(" + std::to_string(seed) + ")");
  }
  rep.min_exponent = std::numeric_limits<double>::infinity();
  for (const auto& s : rep.samples) {
    rep.max_spread = std::max(rep.max_spread, s.spread());
    rep.min_exponent = std::min(rep.min_exponent, s.exponents.front());
  }
  rep.verdict = (rep.max_spread <= opts.threshold && rep.min_exponent > 0.0) ? ConformalityVerdict::conformal_like
                                                                            : ConformalityVerdict::spread_detected;
  return rep;
}

}  // namespace pressurelab
