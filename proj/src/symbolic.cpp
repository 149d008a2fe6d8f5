#include "pressurelab/symbolic.hpp"

#include "pressurelab/errors.hpp"

namespace pressurelab {

namespace {

constexpr const char* kModule = "dynamics-core";

bool admissible(const Adjacency& a, const std::vector<int>& w) {
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (!a[static_cast<std::size_t>(w[i - 1])][static_cast<std::size_t>(w[i])]) return false;
  }
  return true;
}

}  // namespace

std::uint64_t count_admissible_words(const Adjacency& adjacency, int n) {
  if (n <= 0) return 0;
  const std::size_t b = adjacency.size();
  std::vector<std::uint64_t> ending(b, 1), next(b);
  for (int len = 1; len < n; ++len) {
    std::fill(next.begin(), next.end(), 0);
    for (std::size_t i = 0; i < b; ++i) {
      for (std::size_t j = 0; j < b; ++j) {
        if (adjacency[i][j]) next[j] += ending[i];
      }
    }
    ending.swap(next);
  }
  std::uint64_t total = 0;
  for (auto c : ending) total += c;
  return total;
}

void for_each_admissible_word(const Adjacency& adjacency, int n,
                              const std::function<void(const std::vector<int>&)>& visit) {
  if (n <= 0) return;
  const int b = static_cast<int>(adjacency.size());
  std::vector<int> w(static_cast<std::size_t>(n), 0);
  while (true) {
    if (admissible(adjacency, w)) visit(w);
    int pos = 0;
    while (pos < n && ++w[static_cast<std::size_t>(pos)] == b) {
      w[static_cast<std::size_t>(pos)] = 0;
      ++pos;
    }
    if (pos == n) return;
  }
}

std::vector<Word> admissible_words(const Adjacency& adjacency, int n) {
  std::vector<Word> out;
  for_each_admissible_word(adjacency, n, [&](const std::vector<int>& w) { out.emplace_back(w); });
  return out;
}

std::vector<Word> primitive_cycles(const Adjacency& adjacency, int max_period) {
  // Duval's algorithm generates Lyndon words in lexicographic order.
  std::vector<Word> out;
  const int k = static_cast<int>(adjacency.size());
  if (max_period < 1 || k < 1) return out;
  std::vector<int> w{0};
  while (!w.empty()) {
    const int p = static_cast<int>(w.size());
    std::vector<int> cyc = w;
    cyc.push_back(w.front());
    if (admissible(adjacency, cyc)) out.emplace_back(w);
    while (static_cast<int>(w.size()) < max_period) w.push_back(w[w.size() - static_cast<std::size_t>(p)]);
    while (!w.empty() && w.back() == k - 1) w.pop_back();
    if (!w.empty()) ++w.back();
  }
  return out;
}

Point periodic_point(const ExpandingMap& map, const Word& w) {
  std::vector<int> cyc = w.symbols();
  if (cyc.empty()) throw LabError(ErrorKind::BadSpec, kModule, "empty periodic word");
  cyc.push_back(cyc.front());
  if (!map.is_admissible(Word(cyc))) {
    throw LabError(ErrorKind::BadSpec, kModule, "periodic word is not cyclically admissible");
  }
  Point x = map.branch(w[0]).seed;
  for (int iter = 0; iter < 10000; ++iter) {
    Point y = x;
    for (std::size_t k = w.size(); k-- > 0;) y = map.branch(w[k]).inverse(y);
    const double step = map.distance(x, y);
    x = y;
    if (step == 0.0) break;
    // The composition contracts by at least max_contraction^p per sweep.
    if (step < 1e-15 && iter > 2) break;
  }
  return x;
}

}  // namespace pressurelab
