#include <cmath>
#include <limits>

#include "pressurelab/errors.hpp"
#include "pressurelab/kernels.hpp"
#include "pressurelab/symbolic.hpp"

namespace pressurelab::reference {

namespace {

/// Cylinder point of w[k..L-1] built with the fibers at positions k..L-1.
Point suffix_point(FiberSequence fibers, const std::vector<int>& w, std::size_t k) {
  const std::size_t last = w.size() - 1;
  Point x = fibers[last]->branch(w[last]).seed;
  for (std::size_t j = last; j-- > k;) x = fibers[j]->branch(w[j]).inverse(x);
  return x;
}

}  // namespace

CylinderLeaves enumerate_cylinders(FiberSequence fibers, const CylinderRequest& req) {
  if (req.length < 1 || static_cast<int>(fibers.size()) < req.length || req.block < 1 ||
      req.length % req.block != 0) {
    throw LabError(ErrorKind::BadSpec, "pressure", "invalid cylinder request");
  }
  if (count_admissible_words(fibers[0]->adjacency(), req.length) > req.max_leaves) {
    throw LabError(ErrorKind::MatrixTooLarge, "pressure", "cylinder count exceeds the cap");
  }
  CylinderLeaves out;
  out.length = req.length;
  for_each_admissible_word(fibers[0]->adjacency(), req.length, [&](const std::vector<int>& w) {
    std::vector<Point> orbit(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) orbit[k] = suffix_point(fibers, w, k);

    ++out.count;
    if (req.additive) {
      double s = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) s += req.additive->evaluate(*fibers[k], w[k], orbit[k]);
      out.additive.push_back(s);
    }
    if (req.singular) {
      double ln = 0.0, lc = 0.0;
      for (std::size_t start = 0; start < w.size(); start += static_cast<std::size_t>(req.block)) {
        ScaledProduct p;
        for (std::size_t k = start; k < start + static_cast<std::size_t>(req.block); ++k) {
          p.left_multiply(fibers[k]->branch(w[k]).derivative(orbit[k]));
        }
        const auto [hi, lo] = p.log_singular_values();
        ln += hi;
        lc += lo;
      }
      out.log_norm.push_back(ln);
      out.log_conorm.push_back(lc);
    }
    if (req.keep_points) out.points.push_back(orbit[0]);
    if (req.keep_words) {
      for (int s : w) out.words.push_back(static_cast<std::uint8_t>(s));
    }
  });
  return out;
}

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace pressurelab::reference
