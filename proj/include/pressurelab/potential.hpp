#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <utility>

#include "pressurelab/expanding_map.hpp"

namespace pressurelab {

/// A potential for the pressure functional.
///
/// additive: phi evaluated at single points, summed along orbits. The local
/// function sees the map (or fiber map) and the branch containing x, so that
/// geometric potentials like -t log|f'(x)| work on random fibers too.
/// singular_upper: phi_n(x) = -t log ||D_x f^n||.
/// singular_lower: phi_n(x) = -t log m(D_x f^n).
class Potential {
 public:
  enum class Kind { additive, singular_upper, singular_lower };
  using Local = std::function<double(const ExpandingMap&, int branch, const Point&)>;

  static Potential additive(Local fn, double lipschitz, double sup_norm, std::string description) {
    Potential p;
    p.kind_ = Kind::additive;
    p.local_ = std::move(fn);
    p.lipschitz_ = lipschitz;
    p.sup_norm_ = sup_norm;
    p.description_ = std::move(description);
    return p;
  }

  /// phi(x) depending on the point only.
  static Potential of_point(std::function<double(const Point&)> fn, double lipschitz, double sup_norm,
                            std::string description) {
    return additive([fn = std::move(fn)](const ExpandingMap&, int, const Point& x) { return fn(x); },
                    lipschitz, sup_norm, std::move(description));
  }

  static Potential zero() {
    return additive([](const ExpandingMap&, int, const Point&) { return 0.0; }, 0.0, 0.0, "zero");
  }

  static Potential constant(double c) {
    std::ostringstream s;
    s << "const(" << c << ")";
    return additive([c](const ExpandingMap&, int, const Point&) { return c; }, 0.0, std::abs(c), s.str());
  }

  /// -t log m(D_x f) at a single point; equals -t log|f'(x)| in 1D.
  static Potential geometric(double t) {
    std::ostringstream s;
    s << "-" << t << "*log|Df|";
    Potential p = additive(
        [t](const ExpandingMap& map, int branch, const Point& x) {
          const auto sv = singular_values(map.branch(branch).derivative(x));
          return -t * std::log(sv.second);
        },
        0.0, 0.0, s.str());
    p.geometric_t_ = t;
    return p;
  }

  static Potential singular_upper(double t) { return singular(Kind::singular_upper, t); }
  static Potential singular_lower(double t) { return singular(Kind::singular_lower, t); }

  /// phi + eps * psi (both additive).
  Potential plus(const Potential& psi, double eps) const {
    std::ostringstream s;
    s << description_ << "+" << eps << "*(" << psi.description_ << ")";
    Local a = local_, b = psi.local_;
    Potential p = additive(
        [a, b, eps](const ExpandingMap& m, int br, const Point& x) { return a(m, br, x) + eps * b(m, br, x); },
        lipschitz_ + std::abs(eps) * psi.lipschitz_, sup_norm_ + std::abs(eps) * psi.sup_norm_, s.str());
    return p;
  }

  Kind kind() const { return kind_; }
  bool is_additive() const { return kind_ == Kind::additive; }
  bool is_geometric() const { return !std::isnan(geometric_t_); }
  double t() const { return kind_ == Kind::additive ? geometric_t_ : t_; }
  const std::string& description() const { return description_; }
  double sup_norm() const { return sup_norm_; }

  /// Lipschitz constant of phi on `map`. For geometric potentials on 1D maps:
  /// |d/dx log|f'|| <= holder constant / min|f'|.
  double lipschitz(const ExpandingMap& map) const {
    if (is_geometric()) return std::abs(geometric_t_) * map.derivative_holder_constant() / map.min_conorm();
    return lipschitz_;
  }

  double evaluate(const ExpandingMap& map, int branch, const Point& x) const { return local_(map, branch, x); }
  const Local& local() const { return local_; }

 private:
  static Potential singular(Kind kind, double t) {
    Potential p;
    p.kind_ = kind;
    p.t_ = t;
    std::ostringstream s;
    s << "-" << t << (kind == Kind::singular_upper ? "*log||Df^n||" : "*log m(Df^n)");
    p.description_ = s.str();
    return p;
  }

  Kind kind_ = Kind::additive;
  Local local_;
  double t_ = 0.0;
  double geometric_t_ = std::nan("");
  double lipschitz_ = 0.0;
  double sup_norm_ = 0.0;
  std::string description_;
};

}  // namespace pressurelab
