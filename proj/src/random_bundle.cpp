#include "pressurelab/random_bundle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "pressurelab/bowen.hpp"
#include "pressurelab/errors.hpp"
#include "pressurelab/pressure.hpp"
#include "pressurelab/symbolic.hpp"

namespace pressurelab {

namespace {

constexpr const char* kModule = "random-bundle";

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

/// Fiber cylinder point of w (positions 0..|w|-1 use fibers[0..]).
Point fiber_cylinder_point(FiberSequence fibers, const std::vector<int>& w) {
  const std::size_t last = w.size() - 1;
  Point x = fibers[last]->branch(w[last]).seed;
  for (std::size_t j = last; j-- > 0;) x = fibers[j]->branch(w[j]).inverse(x);
  return x;
}

}  // namespace

int BaseSample::symbol(int offset) const {
  const int pos = shift_origin + offset;
  if (pos < -horizon || pos > horizon) {
    std::ostringstream msg;
    msg << "base position " << pos << " outside the window [-" << horizon << ", " << horizon << "]";
    throw LabError(ErrorKind::HorizonExceeded, kModule, msg.str());
  }
  return window[static_cast<std::size_t>(pos + horizon)];
}

BaseSample BaseSample::shifted(int k) const {
  BaseSample out = *this;
  out.shift_origin += k;
  if (out.shift_origin < -horizon || out.shift_origin > horizon) {
    throw LabError(ErrorKind::HorizonExceeded, kModule, "shift leaves the sampled window");
  }
  return out;
}

BaseSample sample_base(std::uint64_t seed, int horizon, int alphabet) {
  if (horizon < 1 || alphabet < 1) throw LabError(ErrorKind::BadSpec, kModule, "horizon and alphabet must be >= 1");
  BaseSample b;
  b.seed = seed;
  b.horizon = horizon;
  b.alphabet_size = alphabet;
  std::mt19937_64 rng(seed);
  b.window.resize(static_cast<std::size_t>(2 * horizon + 1));
  for (int& s : b.window) s = static_cast<int>(rng() % static_cast<std::uint64_t>(alphabet));
  return b;
}

RandomFamily RandomFamily::create(const MapSpec& spec, double epsilon, int alphabet) {
  if (!(epsilon >= 0.0)) throw LabError(ErrorKind::BadSpec, kModule, "epsilon must be >= 0");
  if (alphabet < 1) throw LabError(ErrorKind::BadSpec, kModule, "alphabet must be >= 1");
  RandomFamily fam;
  fam.spec_ = spec;
  fam.epsilon_ = epsilon;
  fam.alphabet_ = alphabet;
  fam.base_ = std::make_shared<const ExpandingMap>(build_markov_map(spec));
  const double alpha = spec.number("alpha", 1.0);

  int degree = 2;
  double amp = 0.0, r1 = 0.0, r2 = 0.0;
  if (spec.family == "doubling" || spec.family == "circle") {
    fam.shape_ = PerturbationShape::circle_bump;
    if (spec.family == "circle") {
      degree = static_cast<int>(spec.number("degree", 2.0));
      amp = spec.number("amp", 0.0);
    }
    fam.holder_budget_ = 2.0 * std::numbers::pi;
  } else if (spec.family == "cookie_cutter") {
    fam.shape_ = PerturbationShape::cookie_slopes;
    r1 = spec.number("r1");
    r2 = spec.number("r2");
    fam.holder_budget_ = std::max(r1, r2);
  } else {
    throw LabError(ErrorKind::BadSpec, kModule, "no perturbation family for map family '" + spec.family + "'");
  }

  const double c = fam.base_->min_conorm() - 1.0;
  fam.certificate_ = 1.0 + 0.5 * c;
  for (int s = 0; s < alphabet; ++s) {
    const double a = fam.amplitude(s);
    const std::string id = spec.canonical() + " eps=" + fmt17(epsilon) + " a=" + fmt17(a);
    try {
      if (fam.shape_ == PerturbationShape::circle_bump) {
        fam.fibers_.push_back(std::make_shared<const ExpandingMap>(make_circle_map(degree, amp + epsilon * a, alpha, id)));
      } else {
        const double scale = 1.0 + epsilon * a;
        fam.fibers_.push_back(std::make_shared<const ExpandingMap>(make_cookie_cutter(r1 * scale, r2 * scale, alpha, id)));
      }
    } catch (const LabError& e) {
      throw LabError(ErrorKind::PerturbationTooLarge, kModule,
                     "fiber for a = " + fmt17(a) + " is not a valid expanding map: " + e.what());
    }
    if (fam.fibers_.back()->min_conorm() < fam.certificate_) {
      std::ostringstream msg;
      msg << "fiber for a = " << a << " has min expansion " << fam.fibers_.back()->min_conorm()
          << " < certified " << fam.certificate_;
      throw LabError(ErrorKind::PerturbationTooLarge, kModule, msg.str());
    }
  }
  return fam;
}

double RandomFamily::amplitude(int symbol) const {
  if (alphabet_ == 1) return 0.0;
  return -1.0 + 2.0 * symbol / (alphabet_ - 1.0);
}

double RandomFamily::min_fiber_conorm() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& f : fibers_) m = std::min(m, f->min_conorm());
  return m;
}

double RandomFamily::max_fiber_piece_diameter() const {
  double d = 0.0;
  for (const auto& f : fibers_) d = std::max(d, f->max_piece_diameter());
  return d;
}

std::string RandomFamily::description() const {
  std::ostringstream s;
  s << spec_.canonical() << " eps=" << epsilon_ << " alphabet=" << alphabet_
    << (shape_ == PerturbationShape::circle_bump ? " shape=circle_bump" : " shape=cookie_slopes");
  return s.str();
}

const ExpandingMap& perturbed_map(const RandomFamily& fam, const BaseSample& omega) {
  return fam.fiber(omega.symbol(0));
}

std::vector<const ExpandingMap*> fiber_sequence(const RandomFamily& fam, const BaseSample& omega, int length) {
  std::vector<const ExpandingMap*> out;
  out.reserve(static_cast<std::size_t>(length));
  for (int k = 0; k < length; ++k) out.push_back(&fam.fiber(omega.symbol(k)));
  return out;
}

Point FiberConjugacy::evaluate(const Word& w) const {
  const Word ext = extend_word(family->base_map(), w, depth);
  const auto fibers = fiber_sequence(*family, omega, static_cast<int>(ext.size()));
  return fiber_cylinder_point(fibers, ext.symbols());
}

Point FiberConjugacy::base_point(const Word& w) const { return repeller_point(family->base_map(), w, depth); }

FiberConjugacy FiberConjugacy::shifted() const {
  FiberConjugacy c = *this;
  c.omega = omega.shifted(1);
  c.omega.symbol(depth - 1);
  return c;
}

double FiberConjugacy::equivariance_residual(const std::vector<Word>& words) const {
  const FiberConjugacy next = shifted();
  const ExpandingMap& t0 = perturbed_map(*family, omega);
  double worst = 0.0;
  for (const Word& w : words) {
    const Point hx = evaluate(w);
    const Point lhs = t0.branch(w[0]).forward(hx);
    const Word ext = extend_word(family->base_map(), w, depth);
    const Word tail(std::vector<int>(ext.symbols().begin() + 1, ext.symbols().end()));
    const Point rhs = next.evaluate(tail);
    worst = std::max(worst, t0.distance(lhs, rhs));
  }
  return worst;
}

FiberConjugacy build_conjugacy(const RandomFamily& fam, const BaseSample& omega, int depth) {
  FiberConjugacy c;
  c.family = &fam;
  c.omega = omega;
  c.gamma = fam.gamma();
  c.depth = depth > 0 ? depth : static_cast<int>(std::ceil(std::log(1e-12) / std::log(c.gamma)));
  omega.symbol(c.depth - 1);
  c.error_bound = std::pow(c.gamma, c.depth - 1) * fam.max_fiber_piece_diameter();
  return c;
}

std::vector<Point> fiber_repeller(const FiberConjugacy& conj, int n) {
  std::vector<Point> out;
  for_each_admissible_word(conj.family->base_map().adjacency(), n,
                           [&](const std::vector<int>& w) { out.push_back(conj.evaluate(Word(w))); });
  return out;
}

double conjugacy_displacement(const FiberConjugacy& conj, int n) {
  const ExpandingMap& f = conj.family->base_map();
  double worst = 0.0;
  for_each_admissible_word(f.adjacency(), n, [&](const std::vector<int>& w) {
    worst = std::max(worst, f.distance(conj.evaluate(Word(w)), conj.base_point(Word(w))));
  });
  return worst;
}

RandomPressureEstimate random_pressure(const RandomFamily& fam, const Potential& pot,
                                       const std::vector<std::uint64_t>& seeds, int n,
                                       const RandomPressureOptions& opts) {
  if (seeds.empty()) throw LabError(ErrorKind::BadSpec, kModule, "need at least one seed");
  RandomPressureEstimate est;
  est.n = n;
  est.separation = fam.base_map().default_epsilon();
  auto value_for = [&](const BaseSample& omega) {
    const auto fibers = fiber_sequence(fam, omega, n);
    if (pot.is_additive()) {
      CylinderRequest req;
      req.length = n;
      req.additive = &pot;
      return kernels::log_sum_exp(kernels::enumerate_cylinders(fibers, req).additive) / n;
    }
    return singular_leaves(fibers, n, opts.block > 0 ? opts.block : n).pressure(pot.kind(), pot.t());
  };
  if (opts.single_orbit_segments > 0) {
    const BaseSample omega = sample_base(seeds.front(), n * opts.single_orbit_segments + 1, fam.alphabet());
    for (int j = 0; j < opts.single_orbit_segments; ++j) est.per_omega.push_back(value_for(omega.shifted(j * n)));
  } else {
    for (std::uint64_t seed : seeds) est.per_omega.push_back(value_for(sample_base(seed, n, fam.alphabet())));
  }
  est.omega_samples = static_cast<int>(est.per_omega.size());
  est.value = mean(est.per_omega);
  est.std_error = std_error(est.per_omega);
  return est;
}

RandomRoots random_bowen_roots(const RandomFamily& fam, const std::vector<std::uint64_t>& seeds, int n, double tol) {
  if (seeds.empty()) throw LabError(ErrorKind::BadSpec, kModule, "need at least one seed");
  std::vector<SingularLeaves> leaves;
  for (std::uint64_t seed : seeds) {
    const BaseSample omega = sample_base(seed, n, fam.alphabet());
    leaves.push_back(singular_leaves(fiber_sequence(fam, omega, n), n, n));
  }
  auto averaged = [&](Potential::Kind kind) {
    return [&leaves, kind](double t) {
      double s = 0.0;
      for (const auto& l : leaves) s += l.pressure(kind, t);
      return s / static_cast<double>(leaves.size());
    };
  };
  const double dim = fam.base_map().dimension();
  RandomRoots r;
  r.t = clamped_root(averaged(Potential::Kind::singular_upper), dim, tol);
  r.s = clamped_root(averaged(Potential::Kind::singular_lower), dim, tol);
  for (const auto& l : leaves) {
    r.per_seed_t.push_back(clamped_root([&](double t) { return l.pressure(Potential::Kind::singular_upper, t); }, dim, tol));
    r.per_seed_s.push_back(clamped_root([&](double t) { return l.pressure(Potential::Kind::singular_lower, t); }, dim, tol));
  }
  r.std_error = std::max(std_error(r.per_seed_t), std_error(r.per_seed_s));
  return r;
}

double default_collar_radius(const ExpandingMap& map) {
  if (map.ambient() != Ambient::interval) return 0.25;
  std::vector<Interval> doms;
  for (const auto& b : map.branches()) doms.push_back(b.domain);
  std::sort(doms.begin(), doms.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < doms.size(); ++i) gap = std::min(gap, doms[i + 1].lo - doms[i].hi);
  if (!(gap > 0.0) || !std::isfinite(gap)) return 0.25;
  return 0.25 * gap;
}

DistortionReport distortion_constants(const RandomFamily& fam, const BaseSample& omega, int sample_pairs, double r0) {
  if (sample_pairs < 100) throw LabError(ErrorKind::BadSpec, kModule, "need at least 100 sample pairs");
  const ExpandingMap& t = perturbed_map(fam, omega);
  if (t.dimension() != 1) throw LabError(ErrorKind::BadSpec, kModule, "distortion sampling is one-dimensional");
  constexpr int kWordLength = 14;
  constexpr int kMaxPrefix = 8;
  const auto fibers = fiber_sequence(fam, omega, kWordLength);
  const double alpha = t.holder_exponent();
  const Adjacency& adj = t.adjacency();
  const int b = t.branch_count();

  std::mt19937_64 rng(omega.seed ^ 0x9e3779b97f4a7c15ULL);
  auto extend_random = [&](std::vector<int>& w) {
    while (static_cast<int>(w.size()) < kWordLength) {
      std::vector<int> next;
      for (int c = 0; c < b; ++c) {
        if (w.empty() || adj[static_cast<std::size_t>(w.back())][static_cast<std::size_t>(c)]) next.push_back(c);
      }
      w.push_back(next[rng() % next.size()]);
    }
  };

  struct Pair {
    Point x, y;
    int branch;
  };
  std::vector<Pair> pairs;
  pairs.reserve(static_cast<std::size_t>(sample_pairs));
  while (static_cast<int>(pairs.size()) < sample_pairs) {
    std::vector<int> w1;
    extend_random(w1);
    const int p = 1 + static_cast<int>(rng() % kMaxPrefix);
    std::vector<int> w2(w1.begin(), w1.begin() + p);
    extend_random(w2);
    if (w1 == w2) continue;
    pairs.push_back({fiber_cylinder_point(fibers, w1), fiber_cylinder_point(fibers, w2), w1[0]});
  }

  DistortionReport rep;
  rep.pairs = sample_pairs;
  rep.r0 = r0 > 0.0 ? r0 : default_collar_radius(fam.base_map());
  for (const Pair& pr : pairs) {
    const double d = std::abs(pr.x.x - pr.y.x);
    const double dx = std::abs(t.branch(pr.branch).derivative(pr.x).a);
    const double dy = std::abs(t.branch(pr.branch).derivative(pr.y).a);
    rep.k0 = std::max(rep.k0, std::abs(dx - dy) / std::pow(d, alpha));
  }
  rep.k = std::max({rep.k0, t.diameter() / rep.r0, t.max_norm() / std::pow(rep.r0, alpha)});
  rep.worst_violation = std::numeric_limits<double>::infinity();
  for (const Pair& pr : pairs) {
    const BranchSpec& br = t.branch(pr.branch);
    const double d = std::abs(pr.x.x - pr.y.x);
    // Raw difference of branch values: a branch maps its piece onto its
    // image without wrapping.
    const double q = std::abs(br.forward(pr.x).x - br.forward(pr.y).x) / d;
    const double lam = std::abs(br.derivative(pr.x).a);
    const double slack_lo = q - (lam - rep.k * std::pow(d, alpha));
    const double slack_hi = (lam + rep.k * std::pow(d, alpha)) - q;
    rep.worst_violation = std::min({rep.worst_violation, slack_lo, slack_hi});
  }
  return rep;
}

double expansivity_min_growth(const RandomFamily& fam, const BaseSample& omega, int n) {
  const auto fibers = fiber_sequence(fam, omega, n);
  const SingularLeaves leaves = singular_leaves(fibers, n, 1);
  return *std::min_element(leaves.log_conorm.begin(), leaves.log_conorm.end()) / n;
}

double random_entropy(const RandomFamily& fam, const std::vector<std::uint64_t>& seeds, int n) {
  return random_pressure(fam, Potential::zero(), seeds, n).value;
}

RandomConjugacyCheck random_conjugacy_pressure_check(const RandomFamily& fam, const FiberConjugacy& conj,
                                                     const Potential& pot, int n) {
  if (!pot.is_additive()) throw LabError(ErrorKind::BadSpec, kModule, "conjugacy check needs an additive potential");
  if (conj.depth < n + 4) throw LabError(ErrorKind::BadSpec, kModule, "conjugacy depth must be at least n + 4");
  const int m = conj.depth;
  const auto fibers = fiber_sequence(fam, conj.omega, m);

  CylinderRequest req;
  req.length = n;
  req.additive = &pot;
  RandomConjugacyCheck out;
  out.fiber_pressure = kernels::log_sum_exp(kernels::enumerate_cylinders(fibers, req).additive) / n;

  // F o h(theta^k omega) at f^k x for x in J coded by the extended word:
  // one backward pass gives every h(theta^k omega)(f^k x).
  std::vector<double> sums;
  std::vector<Point> y(static_cast<std::size_t>(m));
  for_each_admissible_word(fam.base_map().adjacency(), n, [&](const std::vector<int>& w) {
    const Word ext = extend_word(fam.base_map(), Word(w), m);
    y[static_cast<std::size_t>(m - 1)] = fibers[static_cast<std::size_t>(m - 1)]->branch(ext[ext.size() - 1]).seed;
    for (int j = m - 1; j-- > 0;) {
      y[static_cast<std::size_t>(j)] = fibers[static_cast<std::size_t>(j)]->branch(ext[static_cast<std::size_t>(j)])
                                           .inverse(y[static_cast<std::size_t>(j + 1)]);
    }
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += pot.evaluate(*fibers[static_cast<std::size_t>(k)], w[static_cast<std::size_t>(k)], y[static_cast<std::size_t>(k)]);
    sums.push_back(s);
  });
  out.base_pressure = kernels::log_sum_exp(sums) / n;
  out.difference = std::abs(out.fiber_pressure - out.base_pressure);

  double lip = 0.0;
  for (int s = 0; s < fam.alphabet(); ++s) lip = std::max(lip, pot.lipschitz(fam.fiber(s)));
  double geo = 0.0;
  for (int j = 0; j < n; ++j) geo += std::pow(conj.gamma, j);
  out.bound = lip * (geo * fam.max_fiber_piece_diameter() + n * conj.error_bound) / n +
              64.0 * std::numeric_limits<double>::epsilon() * (1.0 + pot.sup_norm());
  return out;
}

std::string StabilityTable::csv_header() { return "epsilon,t_root,s_root,t0,gap_t,gap_s,std_err,n,seeds"; }

std::string StabilityTable::csv() const {
  std::string out = csv_header() + "\n";
  for (const auto& r : rows) {
    out += fmt17(r.epsilon) + "," + fmt17(r.t_root) + "," + fmt17(r.s_root) + "," + fmt17(r.t0) + "," +
           fmt17(r.gap_t) + "," + fmt17(r.gap_s) + "," + fmt17(r.std_err) + "," + std::to_string(r.n) + "," +
           std::to_string(r.seeds) + "\n";
  }
  return out;
}

std::string StabilityTable::certificates_text() const {
  std::string out;
  for (const auto& [k, v] : certificates) out += k + "=" + v + "\n";
  return out;
}

StabilityTable stability_experiment(const MapSpec& base_spec, const std::vector<double>& eps_schedule, int n,
                                    double tol, const StabilityOptions& opts) {
  StabilityTable table;
  table.family = base_spec.canonical();
  const ExpandingMap base = build_markov_map(base_spec);
  const DimensionReport t0_rep = dimension_report(base, opts.t0_depth, tol);
  const double t0 = t0_rep.t_root.value_or(t0_rep.t_lower);
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < opts.seeds; ++i) seeds.push_back(opts.first_seed + static_cast<std::uint64_t>(i));

  auto cert = [&](const std::string& key, double v) { table.certificates.emplace_back(key, fmt17(v)); };
  table.certificates.emplace_back("family", table.family);
  cert("t0", t0);
  cert("n", n);
  cert("seeds", opts.seeds);
  cert("alphabet", opts.alphabet);

  for (double eps : eps_schedule) {
    const std::string tag = "eps=" + fmt17(eps) + ".";
    try {
      const RandomFamily fam = RandomFamily::create(base_spec, eps, opts.alphabet);
      StabilityRow row;
      row.epsilon = eps;
      row.n = n;
      row.seeds = opts.seeds;
      row.t0 = t0;
      const RandomRoots roots = random_bowen_roots(fam, seeds, n, tol);
      row.t_root = roots.t;
      row.s_root = roots.s;
      row.gap_t = std::abs(roots.t - t0);
      row.gap_s = std::abs(roots.s - t0);
      row.std_err = roots.std_error;

      const int depth = opts.conjugacy_depth > 0
                            ? opts.conjugacy_depth
                            : static_cast<int>(std::ceil(std::log(1e-12) / std::log(fam.gamma())));
      const int horizon = depth + n + 2;
      std::vector<double> displacement;
      row.min_growth = std::numeric_limits<double>::infinity();
      row.equivariance_bound = 0.0;
      const std::vector<Word> words = admissible_words(fam.base_map().adjacency(), n);
      for (std::uint64_t seed : seeds) {
        const BaseSample omega = sample_base(seed, horizon, fam.alphabet());
        const FiberConjugacy conj = build_conjugacy(fam, omega, depth);
        row.equivariance_residual = std::max(row.equivariance_residual, conj.equivariance_residual(words));
        row.equivariance_bound = std::max(row.equivariance_bound, 2.0 * conj.error_bound);
        displacement.push_back(conjugacy_displacement(conj, n));
        row.min_growth = std::min(row.min_growth, expansivity_min_growth(fam, omega, n));
      }
      row.displacement = mean(displacement);
      row.displacement_std_err = std_error(displacement);

      // Distortion per fiber map: put each symbol at the origin.
      row.distortion.worst_violation = std::numeric_limits<double>::infinity();
      for (int s = 0; s < fam.alphabet(); ++s) {
        BaseSample omega = sample_base(opts.first_seed + static_cast<std::uint64_t>(s), 16, fam.alphabet());
        omega.window[static_cast<std::size_t>(omega.horizon)] = s;
        const DistortionReport d = distortion_constants(fam, omega, opts.distortion_pairs, opts.r0);
        row.distortion.k0 = std::max(row.distortion.k0, d.k0);
        row.distortion.k = std::max(row.distortion.k, d.k);
        row.distortion.r0 = d.r0;
        row.distortion.pairs += d.pairs;
        row.distortion.worst_violation = std::min(row.distortion.worst_violation, d.worst_violation);
      }

      cert(tag + "expansion_margin", fam.min_fiber_conorm() - fam.expansion_certificate());
      cert(tag + "expansion_certificate", fam.expansion_certificate());
      cert(tag + "holder_budget", fam.holder_budget());
      cert(tag + "gamma", fam.gamma());
      cert(tag + "conjugacy_depth", depth);
      cert(tag + "horizon", horizon);
      cert(tag + "equivariance_residual", row.equivariance_residual);
      cert(tag + "equivariance_bound", row.equivariance_bound);
      cert(tag + "sup_h_minus_id", row.displacement);
      cert(tag + "sup_h_minus_id_std_err", row.displacement_std_err);
      cert(tag + "min_growth", row.min_growth);
      cert(tag + "r0", row.distortion.r0);
      cert(tag + "distortion_K0", row.distortion.k0);
      cert(tag + "distortion_K", row.distortion.k);
      cert(tag + "distortion_pairs", row.distortion.pairs);
      cert(tag + "distortion_worst_slack", row.distortion.worst_violation);
      table.rows.push_back(row);
    } catch (const LabError& e) {
      table.errors.push_back(tag + " " + e.what());
      table.certificates.emplace_back(tag + "error", std::string(to_string(e.kind())));
    }
  }
  return table;
}

}  // namespace pressurelab
