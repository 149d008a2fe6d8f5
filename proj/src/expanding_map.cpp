#include "pressurelab/expanding_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pressurelab/errors.hpp"

namespace pressurelab {

namespace {

constexpr const char* kModule = "dynamics-core";
constexpr int kSamplesPerPiece = 257;
constexpr int kTorusGrid = 24;
constexpr double kInverseTolerance = 1e-9;
constexpr double kMarkovTolerance = 1e-12;

double circle_gap(double a, double b) {
  double d = std::abs(a - b);
  d -= std::floor(d);
  return std::min(d, 1.0 - d);
}

std::vector<Point> sample_piece(const ExpandingMap::Parts& parts, int branch) {
  std::vector<Point> pts;
  if (parts.ambient == Ambient::torus) {
    // Torus pieces are described implicitly by `locate`; sample the whole
    // torus and keep the points that fall in this piece.
    for (int i = 0; i < kTorusGrid; ++i) {
      for (int j = 0; j < kTorusGrid; ++j) {
        const Point p{(i + 0.5) / kTorusGrid, (j + 0.5) / kTorusGrid};
        if (parts.locate(p) == branch) pts.push_back(p);
      }
    }
    pts.push_back(parts.branches[static_cast<std::size_t>(branch)].seed);
    return pts;
  }
  const Interval& dom = parts.branches[static_cast<std::size_t>(branch)].domain;
  for (int i = 0; i < kSamplesPerPiece; ++i) {
    pts.push_back({dom.lo + dom.length() * (i + 0.5) / kSamplesPerPiece, 0.0});
  }
  return pts;
}

bool irreducible(const Adjacency& adj) {
  const std::size_t n = adj.size();
  for (std::size_t start = 0; start < n; ++start) {
    std::vector<std::uint8_t> seen(n, 0);
    std::vector<std::size_t> stack{start};
    std::size_t reached = 0;
    while (!stack.empty()) {
      const std::size_t a = stack.back();
      stack.pop_back();
      for (std::size_t b = 0; b < n; ++b) {
        if (adj[a][b] && !seen[b]) {
          seen[b] = 1;
          ++reached;
          stack.push_back(b);
        }
      }
    }
    if (reached != n) return false;
  }
  return true;
}

Adjacency derive_interval_adjacency(const ExpandingMap::Parts& parts) {
  const std::size_t n = parts.branches.size();
  Adjacency adj(n, std::vector<std::uint8_t>(n, 0));
  for (std::size_t a = 0; a < n; ++a) {
    const Interval img = parts.branches[a].image;
    const double c = std::min(img.lo, img.hi), d = std::max(img.lo, img.hi);
    for (std::size_t b = 0; b < n; ++b) {
      const Interval dom = parts.branches[b].domain;
      if (dom.lo >= c - kMarkovTolerance && dom.hi <= d + kMarkovTolerance) {
        adj[a][b] = 1;
      } else if (dom.hi <= c + kMarkovTolerance || dom.lo >= d - kMarkovTolerance) {
        adj[a][b] = 0;
      } else {
        std::ostringstream msg;
        msg << "image of branch " << a << " partially covers the domain of branch " << b;
        throw LabError(ErrorKind::NonMarkov, kModule, msg.str());
      }
    }
  }
  return adj;
}

}  // namespace

Point wrap(Ambient ambient, const Point& p) {
  switch (ambient) {
    case Ambient::interval: return p;
    case Ambient::circle: return {p.x - std::floor(p.x), 0.0};
    case Ambient::torus: return {p.x - std::floor(p.x), p.y - std::floor(p.y)};
  }
  return p;
}

ExpandingMap ExpandingMap::create(Parts parts) {
  if (parts.branches.empty()) {
    throw LabError(ErrorKind::BadSpec, kModule, "map has no branches");
  }
  if (!(parts.holder_exponent > 0.0 && parts.holder_exponent <= 1.0)) {
    throw LabError(ErrorKind::BadSpec, kModule, "holder exponent must lie in (0, 1]");
  }
  if (!parts.locate) {
    throw LabError(ErrorKind::BadSpec, kModule, "map has no locator");
  }

  ExpandingMap map(std::move(parts));
  const Parts& p = map.parts_;
  const int n = static_cast<int>(p.branches.size());

  // Uniform expansion and invertibility on each piece.
  double min_conorm = std::numeric_limits<double>::infinity();
  double max_norm = 0.0;
  for (int b = 0; b < n; ++b) {
    const BranchSpec& br = p.branches[static_cast<std::size_t>(b)];
    for (const Point& x : sample_piece(p, b)) {
      const auto [hi, lo] = singular_values(br.derivative(x));
      min_conorm = std::min(min_conorm, lo);
      max_norm = std::max(max_norm, hi);
    }
  }
  if (!(min_conorm > 1.0)) {
    std::ostringstream msg;
    msg << "minimal singular value of Df is " << min_conorm << " <= 1";
    throw LabError(ErrorKind::NonExpanding, kModule, msg.str());
  }
  map.min_conorm_ = min_conorm;
  map.max_norm_ = max_norm;

  for (int b = 0; b < n; ++b) {
    const BranchSpec& br = p.branches[static_cast<std::size_t>(b)];
    for (const Point& x : sample_piece(p, b)) {
      if (p.locate(x) != b) {
        throw LabError(ErrorKind::BadSpec, kModule,
                       "locator disagrees with branch pieces (overlapping domains?)");
      }
      const Point back = br.inverse(br.forward(x));
      if (map.distance(back, x) > kInverseTolerance) {
        throw LabError(ErrorKind::BadSpec, kModule, "inverse branch does not invert forward branch");
      }
    }
  }

  // Markov structure.
  if (p.ambient == Ambient::interval) {
    std::vector<Interval> doms;
    for (const auto& br : p.branches) doms.push_back(br.domain);
    std::sort(doms.begin(), doms.end(), [](const Interval& l, const Interval& r) { return l.lo < r.lo; });
    for (std::size_t i = 0; i + 1 < doms.size(); ++i) {
      if (doms[i].hi > doms[i + 1].lo + kMarkovTolerance) {
        throw LabError(ErrorKind::NonMarkov, kModule, "branch domains overlap");
      }
    }
    Adjacency derived = derive_interval_adjacency(p);
    if (p.adjacency.empty()) {
      map.parts_.adjacency = std::move(derived);
    } else if (p.adjacency != derived) {
      throw LabError(ErrorKind::NonMarkov, kModule, "declared adjacency disagrees with branch images");
    }
  } else if (p.adjacency.empty()) {
    map.parts_.adjacency.assign(static_cast<std::size_t>(n), std::vector<std::uint8_t>(static_cast<std::size_t>(n), 1));
  }
  if (map.parts_.adjacency.size() != static_cast<std::size_t>(n) || !irreducible(map.parts_.adjacency)) {
    throw LabError(ErrorKind::NonMarkov, kModule, "adjacency matrix is not irreducible");
  }

  // Separation of distinct representatives at their last differing symbol.
  double sep = std::numeric_limits<double>::infinity();
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      sep = std::min(sep, map.distance(map.branch(a).seed, map.branch(b).seed));
      for (int c = 0; c < n; ++c) {
        if (!map.transition(a, c) || !map.transition(b, c)) continue;
        for (const Point& z : sample_piece(p, c)) {
          sep = std::min(sep, map.distance(map.branch(a).inverse(z), map.branch(b).inverse(z)));
        }
      }
    }
  }
  map.separation_scale_ = std::isfinite(sep) ? sep : map.diameter();
  return map;
}

double ExpandingMap::distance(const Point& p, const Point& q) const {
  switch (parts_.ambient) {
    case Ambient::interval: return std::abs(p.x - q.x);
    case Ambient::circle: return circle_gap(p.x, q.x);
    case Ambient::torus: return std::hypot(circle_gap(p.x, q.x), circle_gap(p.y, q.y));
  }
  return 0.0;
}

double ExpandingMap::diameter() const {
  switch (parts_.ambient) {
    case Ambient::interval: {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (const auto& br : parts_.branches) {
        lo = std::min(lo, br.domain.lo);
        hi = std::max(hi, br.domain.hi);
      }
      return hi - lo;
    }
    case Ambient::circle: return 0.5;
    case Ambient::torus: return std::sqrt(0.5);
  }
  return 0.0;
}

double ExpandingMap::derivative_holder_constant() const {
  double k = 0.0;
  for (const auto& br : parts_.branches) k = std::max(k, br.derivative_holder_constant);
  return k;
}

double ExpandingMap::max_piece_diameter() const {
  if (parts_.ambient == Ambient::torus) return diameter();
  double len = 0.0;
  for (const auto& br : parts_.branches) len = std::max(len, br.domain.length());
  return parts_.ambient == Ambient::circle ? std::min(len, 0.5) : len;
}

bool ExpandingMap::is_admissible(const Word& w) const {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] < 0 || w[i] >= branch_count()) return false;
    if (i > 0 && !transition(w[i - 1], w[i])) return false;
  }
  return true;
}

Word itinerary(const ExpandingMap& map, const Point& x0, int n) {
  std::vector<int> symbols;
  symbols.reserve(static_cast<std::size_t>(std::max(n, 0)));
  Point x = wrap(map.ambient(), x0);
  for (int k = 0; k < n; ++k) {
    const int s = map.locate(x);
    if (s < 0) {
      std::ostringstream msg;
      msg << "iterate " << k << " left every branch domain";
      throw LabError(ErrorKind::EscapedRepeller, kModule, msg.str());
    }
    symbols.push_back(s);
    if (k + 1 < n) x = map.branch(s).forward(x);
  }
  return Word(std::move(symbols));
}

Point cylinder_point(const ExpandingMap& map, const Word& w) {
  if (w.empty() || !map.is_admissible(w)) {
    throw LabError(ErrorKind::BadSpec, kModule, "cylinder word is empty or not admissible");
  }
  Point x = map.branch(w[w.size() - 1]).seed;
  for (std::size_t k = w.size() - 1; k-- > 0;) {
    x = map.branch(w[k]).inverse(x);
  }
  return x;
}

CocycleProduct cocycle(const ExpandingMap& map, const Point& x0, int n) {
  if (n < 1) throw LabError(ErrorKind::BadSpec, kModule, "cocycle length must be >= 1");
  ScaledProduct prod;
  Point x = wrap(map.ambient(), x0);
  for (int k = 0; k < n; ++k) {
    const int s = map.locate(x);
    if (s < 0) {
      std::ostringstream msg;
      msg << "iterate " << k << " left every branch domain";
      throw LabError(ErrorKind::EscapedRepeller, kModule, msg.str());
    }
    prod.left_multiply(map.branch(s).derivative(x));
    if (k + 1 < n) x = map.branch(s).forward(x);
  }
  CocycleProduct c;
  c.base_point = wrap(map.ambient(), x0);
  c.length = n;
  c.matrix = prod.matrix();
  c.log_scale = prod.log_scale();
  std::tie(c.log_norm, c.log_conorm) = prod.log_singular_values();
  return c;
}

std::pair<double, double> singular_norms(const Mat2& a) {
  const auto [hi, lo] = singular_values(a);
  if (!(lo > 0.0) || !std::isfinite(hi)) {
    throw LabError(ErrorKind::SingularMatrix, kModule, "matrix is not invertible");
  }
  return {hi, lo};
}

std::pair<double, double> singular_norms(const CocycleProduct& c) {
  if (!std::isfinite(c.log_conorm) || !std::isfinite(c.log_norm)) {
    throw LabError(ErrorKind::SingularMatrix, kModule, "cocycle product is not invertible");
  }
  return {std::exp(c.log_norm), std::exp(c.log_conorm)};
}

Word extend_word(const ExpandingMap& map, const Word& w, int m) {
  if (w.empty() || !map.is_admissible(w)) {
    throw LabError(ErrorKind::BadSpec, kModule, "cannot extend an empty or inadmissible word");
  }
  std::vector<int> symbols = w.symbols();
  while (static_cast<int>(symbols.size()) < m) {
    const int last = symbols.back();
    int next = 0;
    while (!map.transition(last, next)) ++next;
    symbols.push_back(next);
  }
  return Word(std::move(symbols));
}

Point repeller_point(const ExpandingMap& map, const Word& w, int m) {
  return cylinder_point(map, extend_word(map, w, std::max<int>(m, static_cast<int>(w.size()))));
}

}  // namespace pressurelab
