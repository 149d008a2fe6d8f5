#include "pressurelab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <omp.h>

#include "pressurelab/errors.hpp"
#include "pressurelab/symbolic.hpp"

namespace pressurelab {

namespace {

constexpr const char* kModule = "pressure";
constexpr std::size_t kMinTasks = 64;
constexpr std::size_t kReduceChunks = 64;
constexpr std::size_t kPairwiseLeaf = 16;

void check_request(FiberSequence fibers, const CylinderRequest& req) {
  if (req.length < 1 || static_cast<int>(fibers.size()) < req.length) {
    throw LabError(ErrorKind::BadSpec, kModule, "fiber sequence shorter than the word length");
  }
  if (req.block < 1 || req.length % req.block != 0) {
    throw LabError(ErrorKind::BadSpec, kModule, "block must divide the word length");
  }
  const std::uint64_t count = count_admissible_words(fibers[0]->adjacency(), req.length);
  if (count > req.max_leaves) {
    std::ostringstream msg;
    msg << count << " cylinders of length " << req.length << " exceed the cap " << req.max_leaves;
    throw LabError(ErrorKind::MatrixTooLarge, kModule, msg.str());
  }
}

void reserve(CylinderLeaves& out, const CylinderRequest& req, std::size_t n) {
  if (req.additive) out.additive.reserve(n);
  if (req.singular) {
    out.log_norm.reserve(n);
    out.log_conorm.reserve(n);
  }
  if (req.keep_points) out.points.reserve(n);
  if (req.keep_words) out.words.reserve(n * static_cast<std::size_t>(req.length));
}

struct Node {
  Point x;
  double additive = 0.0;
  double log_norm = 0.0;
  double log_conorm = 0.0;
  ScaledProduct block;
};

class Walker {
 public:
  Walker(FiberSequence fibers, const CylinderRequest& req, CylinderLeaves& out)
      : fibers_(fibers), req_(req), out_(out), word_(static_cast<std::size_t>(req.length)) {}

  /// Prepends symbol a at position k to the node for positions k+1..L-1.
  Node step(const Node& parent, int k, int a) const {
    const ExpandingMap& m = *fibers_[static_cast<std::size_t>(k)];
    Node n;
    n.x = (k == req_.length - 1) ? m.branch(a).seed : m.branch(a).inverse(parent.x);
    n.additive = parent.additive;
    n.log_norm = parent.log_norm;
    n.log_conorm = parent.log_conorm;
    if (req_.additive) n.additive += req_.additive->evaluate(m, a, n.x);
    if (req_.singular) {
      n.block = (k % req_.block == req_.block - 1) ? ScaledProduct{} : parent.block;
      n.block.right_multiply(m.branch(a).derivative(n.x));
      if (k % req_.block == 0) {
        const auto [hi, lo] = n.block.log_singular_values();
        n.log_norm += hi;
        n.log_conorm += lo;
      }
    }
    return n;
  }

  void descend(const Node& node, int k) {
    // node covers positions k..L-1.
    if (k == 0) {
      emit(node);
      return;
    }
    const ExpandingMap& m = *fibers_[static_cast<std::size_t>(k - 1)];
    const int next = word_[static_cast<std::size_t>(k)];
    for (int a = 0; a < m.branch_count(); ++a) {
      if (!m.transition(a, next)) continue;
      word_[static_cast<std::size_t>(k - 1)] = a;
      descend(step(node, k - 1, a), k - 1);
    }
  }

  void set_symbol(int k, int a) { word_[static_cast<std::size_t>(k)] = a; }

 private:
  void emit(const Node& node) {
    ++out_.count;
    if (req_.additive) out_.additive.push_back(node.additive);
    if (req_.singular) {
      out_.log_norm.push_back(node.log_norm);
      out_.log_conorm.push_back(node.log_conorm);
    }
    if (req_.keep_points) out_.points.push_back(node.x);
    if (req_.keep_words) {
      for (int s : word_) out_.words.push_back(static_cast<std::uint8_t>(s));
    }
  }

  FiberSequence fibers_;
  const CylinderRequest& req_;
  CylinderLeaves& out_;
  std::vector<int> word_;
};

void append(CylinderLeaves& dst, CylinderLeaves& src) {
  dst.count += src.count;
  dst.additive.insert(dst.additive.end(), src.additive.begin(), src.additive.end());
  dst.log_norm.insert(dst.log_norm.end(), src.log_norm.begin(), src.log_norm.end());
  dst.log_conorm.insert(dst.log_conorm.end(), src.log_conorm.begin(), src.log_conorm.end());
  dst.points.insert(dst.points.end(), src.points.begin(), src.points.end());
  dst.words.insert(dst.words.end(), src.words.begin(), src.words.end());
  src = CylinderLeaves{};
}

double pairwise_sum(const double* v, std::size_t n) {
  if (n <= kPairwiseLeaf) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

}  // namespace

Word CylinderLeaves::word(std::size_t i) const {
  if (words.empty()) throw LabError(ErrorKind::BadSpec, kModule, "words were not kept");
  const auto first = words.begin() + static_cast<std::ptrdiff_t>(i * static_cast<std::size_t>(length));
  return Word(std::vector<int>(first, first + length));
}

std::vector<const ExpandingMap*> constant_fibers(const ExpandingMap& map, int length) {
  return std::vector<const ExpandingMap*>(static_cast<std::size_t>(std::max(length, 0)), &map);
}

namespace kernels {

CylinderLeaves enumerate_cylinders(FiberSequence fibers, const CylinderRequest& req) {
  check_request(fibers, req);
  const int len = req.length;
  const Adjacency& adj = fibers[0]->adjacency();

  // Suffix tasks: the shortest suffix length giving at least kMinTasks tasks.
  int s = 1;
  while (s < len && count_admissible_words(adj, s) < kMinTasks) ++s;
  // Suffix words in colex order of the suffix, i.e. the last symbol slowest.
  std::vector<std::vector<int>> tasks;
  for_each_admissible_word(adj, s, [&](const std::vector<int>& w) { tasks.push_back(w); });

  std::vector<CylinderLeaves> parts(tasks.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    CylinderLeaves& part = parts[t];
    Walker walker(fibers, req, part);
    Node node;
    for (int j = s - 1; j >= 0; --j) {
      const int k = len - s + j;
      const int a = tasks[t][static_cast<std::size_t>(j)];
      walker.set_symbol(k, a);
      node = walker.step(node, k, a);
    }
    walker.descend(node, len - s);
  }

  CylinderLeaves out;
  out.length = len;
  std::size_t total = 0;
  for (const auto& p : parts) total += p.count;
  reserve(out, req, total);
  for (auto& p : parts) append(out, p);
  return out;
}

double log_sum_exp(std::span<const double> v) { return log_sum_exp_scaled(v, 1.0); }

double log_sum_exp_scaled(std::span<const double> v, double scale) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, scale * x);
  if (!std::isfinite(m)) return m;
  const std::size_t n = v.size();
  const std::size_t chunks = std::min(kReduceChunks, n);
  std::vector<double> partial(chunks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t lo = n * c / chunks, hi = n * (c + 1) / chunks;
    std::vector<double> e(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) e[i - lo] = std::exp(scale * v[i] - m);
    partial[c] = pairwise_sum(e.data(), e.size());
  }
  return m + std::log(pairwise_sum(partial.data(), partial.size()));
}

}  // namespace kernels

}  // namespace pressurelab
