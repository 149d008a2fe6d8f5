#include "pressurelab/bowen.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "pressurelab/errors.hpp"
#include "pressurelab/pressure.hpp"

namespace pressurelab {

namespace {

constexpr const char* kModule = "bowen-solver";

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double bowen_root(const std::function<double(double)>& fn, double lo, double hi, double tol) {
  if (!(tol > 0.0) || !(hi > lo)) throw LabError(ErrorKind::BadSpec, kModule, "need lo < hi and tol > 0");
  const double flo = fn(lo), fhi = fn(hi);
  if (!(flo > 0.0 && fhi < 0.0)) {
    std::ostringstream msg;
    msg << "no sign change on [" << lo << ", " << hi << "]: f = " << flo << ", " << fhi;
    throw LabError(ErrorKind::NoSignChange, kModule, msg.str());
  }
  while (hi - lo > tol) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (fn(mid) > 0.0) lo = mid; else hi = mid;
  }
  return lo + 0.5 * (hi - lo);
}

double clamped_root(const std::function<double(double)>& fn, double dim, double tol) {
  if (fn(0.0) <= 0.0) return 0.0;
  if (fn(dim) >= 0.0) return dim;
  return bowen_root(fn, 0.0, dim, tol);
}

std::string DimensionReport::csv_header() { return "map_id,t_lower,t_upper,t_root,depth,tol"; }

std::string DimensionReport::csv_row() const {
  std::string id = map_id;
  if (id.find(',') != std::string::npos) id = "\"" + id + "\"";
  return id + "," + fmt17(t_lower) + "," + fmt17(t_upper) + "," + (t_root ? fmt17(*t_root) : std::string()) + "," +
         std::to_string(depth) + "," + fmt17(tolerance);
}

DimensionReport dimension_report(const ExpandingMap& map, int depth_budget, double tol, const DimensionOptions& opts) {
  if (depth_budget < 1) throw LabError(ErrorKind::BadSpec, kModule, "depth budget must be >= 1");
  const int n = depth_budget;
  const bool extrapolate = opts.extrapolate && n % 2 == 0;
  const int block = opts.block > 0 ? opts.block : n;
  if (n % block != 0 || (extrapolate && (n / 2) % (opts.block > 0 ? block : n / 2) != 0)) {
    throw LabError(ErrorKind::BadSpec, kModule, "block must divide the depth budget");
  }
  const SingularLeaves full = singular_leaves(map, n, block, opts.max_leaves);
  SingularLeaves half;
  if (extrapolate) half = singular_leaves(map, n / 2, opts.block > 0 ? block : n / 2, opts.max_leaves);

  auto pressure = [&](Potential::Kind kind) {
    return [&, kind](double t) {
      const double p = full.pressure(kind, t);
      return extrapolate ? 2.0 * p - half.pressure(kind, t) : p;
    };
  };
  const double dim = map.dimension();
  DimensionReport rep;
  rep.map_id = map.id();
  rep.depth = n;
  rep.tolerance = tol;
  rep.t_lower = clamped_root(pressure(Potential::Kind::singular_upper), dim, tol);
  rep.t_upper = clamped_root(pressure(Potential::Kind::singular_lower), dim, tol);
  rep.bracket_width = rep.t_upper - rep.t_lower;
  if (std::abs(rep.bracket_width) <= 2.0 * tol) rep.t_root = 0.5 * (rep.t_lower + rep.t_upper);
  return rep;
}

}  // namespace pressurelab
