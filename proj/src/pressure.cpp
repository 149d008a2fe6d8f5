#include "pressurelab/pressure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "pressurelab/lyapunov.hpp"
#include "pressurelab/symbolic.hpp"

namespace pressurelab {

namespace {

constexpr const char* kModule = "pressure";

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double additive_pressure_value(const ExpandingMap& map, const Potential& pot, int n, std::size_t cap) {
  const auto fibers = constant_fibers(map, n);
  CylinderRequest req;
  req.length = n;
  req.additive = &pot;
  req.max_leaves = cap;
  const CylinderLeaves leaves = kernels::enumerate_cylinders(fibers, req);
  return kernels::log_sum_exp(leaves.additive) / n;
}

void require_additive(const Potential& pot) {
  if (!pot.is_additive()) throw LabError(ErrorKind::BadSpec, kModule, "potential must be additive");
}

}  // namespace

std::string PressureEstimate::csv_header() { return "map_id,potential_desc,n,eps,value,residual"; }

std::string PressureEstimate::csv_row() const {
  return csv_quote(map_id) + "," + csv_quote(potential_desc) + "," + std::to_string(depth) + "," +
         fmt17(separation) + "," + fmt17(value) + "," + fmt17(residual);
}

double resolve_epsilon(const ExpandingMap& map, double eps) {
  if (eps <= 0.0) return map.default_epsilon();
  if (eps >= map.separation_scale()) {
    std::ostringstream msg;
    msg << "eps = " << eps << " is not below the separation scale " << map.separation_scale();
    throw LabError(ErrorKind::EpsilonTooLarge, kModule, msg.str());
  }
  return eps;
}

std::vector<Point> separated_set(const ExpandingMap& map, int n, double eps) {
  resolve_epsilon(map, eps);
  const auto fibers = constant_fibers(map, n);
  CylinderRequest req;
  req.length = n;
  req.keep_points = true;
  return kernels::enumerate_cylinders(fibers, req).points;
}

PressureEstimate pressure_additive(const ExpandingMap& map, const Potential& pot, int n, double eps) {
  require_additive(pot);
  PressureEstimate est;
  est.map_id = map.id();
  est.potential_desc = pot.description();
  est.separation = resolve_epsilon(map, eps);
  est.depth = n;
  est.value = additive_pressure_value(map, pot, n, kDefaultLeafCap);
  est.per_depth_values.emplace_back(n, est.value);
  return est;
}

PressureEstimate pressure_limit(const ExpandingMap& map, const Potential& pot, double tol, const LimitOptions& opts) {
  require_additive(pot);
  if (!(tol > 0.0)) throw LabError(ErrorKind::BadSpec, kModule, "tolerance must be positive");
  PressureEstimate est;
  est.map_id = map.id();
  est.potential_desc = pot.description();
  est.separation = map.default_epsilon();
  est.extrapolated = true;
  double prev_raw = 0.0, prev_value = 0.0;
  for (int n = 1; n <= opts.max_depth; n *= 2) {
    if (count_admissible_words(map.adjacency(), n) > opts.max_leaves) break;
    const double raw = additive_pressure_value(map, pot, n, opts.max_leaves);
    est.per_depth_values.emplace_back(n, raw);
    est.depth = n;
    if (n == 1) {
      est.value = prev_value = raw;
      prev_raw = raw;
      continue;
    }
    const double value = 2.0 * raw - prev_raw;
    est.value = value;
    est.residual = std::abs(value - prev_value);
    if (est.residual < tol) return est;
    prev_value = value;
    prev_raw = raw;
  }
  std::ostringstream msg;
  msg << "pressure not converged at depth " << est.depth << " (residual " << est.residual << ")";
  throw NoConvergenceError(kModule, msg.str(), est);
}

double SingularLeaves::pressure(Potential::Kind kind, double t) const {
  const auto& v = kind == Potential::Kind::singular_upper ? log_norm : log_conorm;
  return kernels::log_sum_exp_scaled(v, -t) / length;
}

SingularLeaves singular_leaves(FiberSequence fibers, int length, int block, std::size_t max_leaves) {
  CylinderRequest req;
  req.length = length;
  req.block = block;
  req.singular = true;
  req.max_leaves = max_leaves;
  CylinderLeaves leaves = kernels::enumerate_cylinders(fibers, req);
  SingularLeaves out;
  out.length = length;
  out.block = block;
  out.log_norm = std::move(leaves.log_norm);
  out.log_conorm = std::move(leaves.log_conorm);
  return out;
}

SingularLeaves singular_leaves(const ExpandingMap& map, int length, int block, std::size_t max_leaves) {
  const auto fibers = constant_fibers(map, length);
  return singular_leaves(fibers, length, block, max_leaves);
}

double pressure_at_depth(const ExpandingMap& map, const Potential& pot, int n) {
  if (pot.is_additive()) return additive_pressure_value(map, pot, n, kDefaultLeafCap);
  return singular_leaves(map, n, n).pressure(pot.kind(), pot.t());
}

PressureEstimate pressure_subadditive(const ExpandingMap& map, const Potential& pot, const std::vector<int>& depths,
                                      double tol, const SubadditiveOptions& opts) {
  if (pot.is_additive()) throw LabError(ErrorKind::BadSpec, kModule, "potential must be singular_upper/lower");
  if (depths.empty() || !std::is_sorted(depths.begin(), depths.end()) || depths.front() < 1) {
    throw LabError(ErrorKind::BadSpec, kModule, "depths must be a non-empty increasing list of k >= 1");
  }
  int lcm = 1;
  for (int k : depths) lcm = std::lcm(lcm, k);
  int total = opts.total_length;
  if (total == 0) {
    for (int cand = lcm; cand <= std::max(16, lcm); cand += lcm) {
      if (count_admissible_words(map.adjacency(), cand) <= opts.max_leaves) total = cand;
    }
    if (total == 0) {
      throw LabError(ErrorKind::MatrixTooLarge, kModule, "no budget-matched word length fits the leaf cap");
    }
  }
  if (total % lcm != 0) {
    throw LabError(ErrorKind::BadSpec, kModule, "total word length must be a multiple of every k");
  }

  PressureEstimate est;
  est.map_id = map.id();
  est.potential_desc = pot.description();
  est.separation = map.default_epsilon();
  est.depth = total;
  if (map.dimension() == 2) {
    est.advisory = average_conformal_check(map, 3, 0).verdict != ConformalityVerdict::conformal_like;
  }
  for (int k : depths) {
    const double v = singular_leaves(map, total, k, opts.max_leaves).pressure(pot.kind(), pot.t());
    est.per_depth_values.emplace_back(k, v);
  }
  est.value = est.per_depth_values.back().second;
  if (est.per_depth_values.size() > 1) {
    est.residual = std::abs(est.value - est.per_depth_values[est.per_depth_values.size() - 2].second);
  }
  if (est.residual >= tol) {
    std::ostringstream msg;
    msg << "iterated pressures still move by " << est.residual << " at k = " << depths.back();
    throw NoConvergenceError(kModule, msg.str(), est);
  }
  return est;
}

double transfer_pressure(const ExpandingMap& map, const Potential& pot, int n, std::size_t max_cylinders) {
  require_additive(pot);
  if (n < 1) throw LabError(ErrorKind::BadSpec, kModule, "n must be >= 1");
  const std::uint64_t count = count_admissible_words(map.adjacency(), n);
  if (count > max_cylinders) {
    std::ostringstream msg;
    msg << count << " cylinders exceed the transfer-matrix cap " << max_cylinders;
    throw LabError(ErrorKind::MatrixTooLarge, kModule, msg.str());
  }
  const int b = map.branch_count();
  std::vector<double> log_w;
  std::vector<int> first, last;
  for_each_admissible_word(map.adjacency(), n, [&](const std::vector<int>& w) {
    // Birkhoff sum along the forward orbit of the cylinder point.
    Point x = cylinder_point(map, Word(w));
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      const BranchSpec& br = map.branch(w[static_cast<std::size_t>(k)]);
      s += pot.evaluate(map, w[static_cast<std::size_t>(k)], x);
      if (k + 1 < n) x = br.forward(x);
    }
    log_w.push_back(s);
    first.push_back(w.front());
    last.push_back(w.back());
  });
  const double shift = *std::max_element(log_w.begin(), log_w.end());
  std::vector<double> w(log_w.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(log_w[i] - shift);

  // Matrix-free power iteration: (M v)_u = w_u * sum_{b : A[last u][b]} s_b,
  // s_b = sum of v over cylinders starting with b.
  std::vector<double> v(w.size(), 1.0), mv(w.size());
  std::vector<double> s(static_cast<std::size_t>(b));
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 100000; ++iter) {
    std::fill(s.begin(), s.end(), 0.0);
    for (std::size_t u = 0; u < v.size(); ++u) s[static_cast<std::size_t>(first[u])] += v[u];
    lo = std::numeric_limits<double>::infinity();
    hi = 0.0;
    double norm = 0.0;
    for (std::size_t u = 0; u < v.size(); ++u) {
      double acc = 0.0;
      for (int c = 0; c < b; ++c) {
        if (map.transition(last[u], c)) acc += s[static_cast<std::size_t>(c)];
      }
      mv[u] = w[u] * acc;
      const double ratio = mv[u] / v[u];
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
      norm = std::max(norm, mv[u]);
    }
    for (std::size_t u = 0; u < v.size(); ++u) v[u] = mv[u] / norm;
    // Collatz-Wielandt bounds lo <= rho <= hi.
    if (hi - lo <= 1e-14 * hi) break;
  }
  if (!(hi - lo <= 1e-10 * hi)) {
    throw LabError(ErrorKind::NoConvergence, kModule, "power iteration did not converge");
  }
  return (std::log(std::sqrt(lo * hi)) + shift) / n;
}

double variational_gap(const ExpandingMap& map, const Potential& pot, const Word& orbit, double pressure) {
  const Point x = periodic_point(map, orbit);
  const int p = static_cast<int>(orbit.size());
  double phi_p = 0.0;
  if (pot.is_additive()) {
    // Orbit points as periodic points of the rotated words: no forward drift.
    std::vector<int> rot = orbit.symbols();
    for (int k = 0; k < p; ++k) {
      const Point xk = k == 0 ? x : periodic_point(map, Word(rot));
      phi_p += pot.evaluate(map, rot.front(), xk);
      std::rotate(rot.begin(), rot.begin() + 1, rot.end());
    }
  } else {
    ScaledProduct prod;
    std::vector<int> rot = orbit.symbols();
    for (int k = 0; k < p; ++k) {
      const Point xk = periodic_point(map, Word(rot));
      prod.left_multiply(map.branch(rot.front()).derivative(xk));
      std::rotate(rot.begin(), rot.begin() + 1, rot.end());
    }
    const auto [ln, lc] = prod.log_singular_values();
    phi_p = -pot.t() * (pot.kind() == Potential::Kind::singular_upper ? ln : lc);
  }
  return pressure - phi_p / p;
}

double variational_gap(const ExpandingMap& map, const Potential& pot, const Word& orbit) {
  const double pressure = pot.is_additive() ? pressure_limit(map, pot, 1e-9).value
                                            : pressure_subadditive(map, pot, {1, 2, 4}, 1e-6).value;
  return variational_gap(map, pot, orbit, pressure);
}

bool ConjugacyCheck::passed() const {
  return homeomorphism ? std::abs(difference) <= bound : difference <= bound;
}

ConjugacyCheck conjugate_pressure_check(const ExpandingMap& map1, const ExpandingMap& map2,
                                        const std::function<Point(const Point&)>& phi, const Potential& pot,
                                        const ConjugacyOptions& opts) {
  require_additive(pot);
  ConjugacyCheck out;
  out.homeomorphism = opts.homeomorphism;

  // Equivariance on cylinder points of map1.
  int sample_depth = 1;
  while (count_admissible_words(map1.adjacency(), sample_depth + 1) <= 4096 && sample_depth < 10) {
    ++sample_depth;
  }
  for (const Point& x : separated_set(map1, sample_depth, 0.0)) {
    const Point fx = map1.branch(map1.locate(x)).forward(x);
    const Point hx = phi(x);
    const int b2 = map2.locate(hx);
    if (b2 < 0) {
      out.equivariance_residual = std::numeric_limits<double>::infinity();
      break;
    }
    out.equivariance_residual =
        std::max(out.equivariance_residual, map2.distance(phi(fx), map2.branch(b2).forward(hx)));
  }
  if (!(out.equivariance_residual <= opts.equivariance_tolerance)) {
    std::ostringstream msg;
    msg << "equivariance residual " << out.equivariance_residual << " exceeds " << opts.equivariance_tolerance;
    throw LabError(ErrorKind::NotSemiConjugate, kModule, msg.str());
  }

  const Potential pulled = Potential::additive(
      [&map2, phi, local = pot.local()](const ExpandingMap&, int, const Point& x) {
        const Point y = phi(x);
        return local(map2, std::max(map2.locate(y), 0), y);
      },
      pot.lipschitz(map2), pot.sup_norm(), pot.description() + " o phi");

  if (opts.homeomorphism) {
    const int n = opts.depth;
    const double p2 = additive_pressure_value(map2, pot, n, kDefaultLeafCap);
    const double p1 = additive_pressure_value(map1, pulled, n, kDefaultLeafCap);
    out.difference = p2 - p1;
    const double gamma = map2.max_contraction();
    double geo = 0.0;
    for (int j = 0; j < n; ++j) geo += std::pow(gamma, j);
    out.bound = pot.lipschitz(map2) * geo * map2.max_piece_diameter() / n;
    // Floating-point floor for sums of n terms of size sup|F|.
    out.bound += 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + pot.sup_norm());
  } else {
    const PressureEstimate e2 = pressure_limit(map2, pot, opts.tol);
    const PressureEstimate e1 = pressure_limit(map1, pulled, opts.tol);
    out.difference = e2.value - e1.value;
    out.bound = e1.residual + e2.residual + opts.tol;
  }
  return out;
}

}  // namespace pressurelab
