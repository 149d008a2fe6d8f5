// Serial reference against the OpenMP kernels on cylinder enumeration and
// log-sum-exp. Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "pressurelab/kernels.hpp"
#include "pressurelab/map_families.hpp"

using namespace pressurelab;

namespace {

const Potential& cos_potential() {
  static const Potential p =
      Potential::of_point([](const Point& q) { return 0.3 * std::cos(2 * M_PI * q.x); }, 0.6 * M_PI, 0.3, "cos");
  return p;
}

template <CylinderLeaves (*Enumerate)(FiberSequence, const CylinderRequest&)>
void bm_enumerate(benchmark::State& state, const char* spec, bool singular) {
  const ExpandingMap map = build_markov_map(spec);
  const int length = static_cast<int>(state.range(0));
  const auto fibers = constant_fibers(map, length);
  CylinderRequest req;
  req.length = length;
  req.additive = &cos_potential();
  req.singular = singular;
  std::size_t leaves = 0;
  for (auto _ : state) {
    const CylinderLeaves out = Enumerate(fibers, req);
    leaves = out.count;
    benchmark::DoNotOptimize(out.additive.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * leaves));
}

void bm_reference_circle(benchmark::State& s) { bm_enumerate<reference::enumerate_cylinders>(s, "family=circle degree=3 amp=0.1", false); }
void bm_kernel_circle(benchmark::State& s) { bm_enumerate<kernels::enumerate_cylinders>(s, "family=circle degree=3 amp=0.1", false); }
void bm_reference_torus(benchmark::State& s) { bm_enumerate<reference::enumerate_cylinders>(s, "family=toral_diag d1=2 d2=2", true); }
void bm_kernel_torus(benchmark::State& s) { bm_enumerate<kernels::enumerate_cylinders>(s, "family=toral_diag d1=2 d2=2", true); }

BENCHMARK(bm_reference_circle)->Arg(6)->Arg(9)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_kernel_circle)->Arg(6)->Arg(9)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_reference_torus)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_kernel_torus)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

std::vector<double> random_values(std::size_t n) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> d(0.0, 5.0);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

void bm_reference_lse(benchmark::State& state) {
  const auto v = random_values(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::log_sum_exp(v));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void bm_kernel_lse(benchmark::State& state) {
  const auto v = random_values(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::log_sum_exp(v));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(bm_reference_lse)->Arg(1 << 16)->Arg(1 << 22);
BENCHMARK(bm_kernel_lse)->Arg(1 << 16)->Arg(1 << 22);

}  // namespace

BENCHMARK_MAIN();
