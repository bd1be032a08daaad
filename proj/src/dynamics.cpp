#include "growthlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "growthlab/errors.hpp"
#include "growthlab/kahan.hpp"
#include "growthlab/quadrature.hpp"

namespace growthlab {

namespace {

constexpr double kFreezeDist = 1e-12;

/// One advancing probe. Freezing snaps the position onto a fixed point once the
/// orbit gets within kFreezeDist of it; beyond that resolution iteration only
/// accumulates rounding noise.
struct Probe {
  double x0 = 0.0;
  double x = 0.0;
  KahanSum s;
  bool frozen = false;
};

struct FixedSet {
  std::vector<double> points;
  std::vector<std::pair<double, double>> regions;

  // Returns the snap target if x should freeze.
  bool snap(double x, double& target) const {
    for (const double p : points)
      if (std::fabs(x - p) <= kFreezeDist) {
        target = p;
        return true;
      }
    for (const auto& [lo, hi] : regions)
      if (x >= lo && x <= hi) {
        target = x;
        return true;
      }
    return false;
  }
};

void step_probe(const Diffeo::Impl& impl, const FixedSet& fixed, Probe& p) {
  const double d = impl.deriv(p.x);
  if (!(d > 0.0)) throw InvalidDiffeo("derivative <= 0 along orbit");
  p.s += std::log(d);
  if (p.frozen) return;
  double nx = impl.eval(p.x);
  nx = std::clamp(nx, 0.0, 1.0);
  if (std::fabs(nx - p.x) <= 4.0 * kFreezeDist) {
    double target = nx;
    if (fixed.snap(nx, target)) {
      p.x = target;
      p.frozen = true;
      return;
    }
  }
  p.x = nx;
}

double run_product(const Diffeo::Impl& impl, const FixedSet& fixed, double x0, std::size_t n,
                   double* final_x = nullptr) {
  Probe p{x0, x0, KahanSum{}, false};
  for (std::size_t k = 0; k < n; ++k) step_probe(impl, fixed, p);
  if (final_x) *final_x = p.x;
  return p.s.value();
}

FixedSet fixed_set(const Diffeo& f) {
  return FixedSet{f.fixed_points(), f.identity_regions()};
}

std::vector<double> probe_starts(const GridSpec& grid, double lo_depth = 1e-18,
                                 double hi_depth = 1e-15) {
  const std::size_t base = std::max<std::size_t>(grid.base_points, 16);
  std::vector<double> xs{0.0, 1.0};
  const std::size_t n_log = base / 4;
  const double t0 = std::log(lo_depth), t1 = std::log(0.5);
  for (std::size_t i = 0; i < n_log; ++i)
    xs.push_back(std::exp(t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n_log - 1)));
  const double u0 = std::log(hi_depth);
  for (std::size_t i = 0; i < n_log; ++i)
    xs.push_back(1.0 - std::exp(u0 + (t1 - u0) * static_cast<double>(i) / static_cast<double>(n_log - 1)));
  const std::size_t n_uni = base - 2 * n_log;
  for (std::size_t i = 1; i <= n_uni; ++i)
    xs.push_back(static_cast<double>(i) / static_cast<double>(n_uni + 1));
  for (const double s : grid.seeds)
    if (s >= 0.0 && s <= 1.0) xs.push_back(s);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

struct SegmentExtrema {
  std::vector<double> sup, inf, arg_sup, arg_inf;
  void resize(std::size_t n) {
    sup.assign(n, -std::numeric_limits<double>::infinity());
    inf.assign(n, std::numeric_limits<double>::infinity());
    arg_sup.assign(n, 0.0);
    arg_inf.assign(n, 0.0);
  }
};

void advance_chunk(const Diffeo::Impl& impl, const FixedSet& fixed, Probe* probes,
                   std::size_t count, std::size_t steps, SegmentExtrema& out) {
  out.resize(steps);
  for (std::size_t i = 0; i < count; ++i) {
    Probe& p = probes[i];
    for (std::size_t k = 0; k < steps; ++k) {
      step_probe(impl, fixed, p);
      const double v = p.s.value();
      if (v > out.sup[k] || (v == out.sup[k] && p.x0 < out.arg_sup[k])) {
        out.sup[k] = v;
        out.arg_sup[k] = p.x0;
      }
      if (v < out.inf[k] || (v == out.inf[k] && p.x0 < out.arg_inf[k])) {
        out.inf[k] = v;
        out.arg_inf[k] = p.x0;
      }
    }
  }
}

}  // namespace

Trajectory orbit(const Diffeo& f, double x0, std::size_t n) {
  if (!(x0 >= 0.0 && x0 <= 1.0)) throw DomainError("orbit: x0 outside [0,1]");
  if (n < 1) throw DomainError("orbit: n must be >= 1");
  const FixedSet fixed = fixed_set(f);
  const Diffeo::Impl& impl = f.impl();
  Trajectory t;
  t.points.reserve(n + 1);
  t.log_deriv_prefix.reserve(n + 1);
  Probe p{x0, x0, KahanSum{}, false};
  t.points.push_back(p.x);
  t.log_deriv_prefix.push_back(0.0);
  for (std::size_t k = 0; k < n; ++k) {
    step_probe(impl, fixed, p);
    t.points.push_back(p.x);
    t.log_deriv_prefix.push_back(p.s.value());
  }
  return t;
}

double log_deriv_product(const Diffeo& f, double x, std::size_t n) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("log_deriv_product: x outside [0,1]");
  return run_product(f.impl(), fixed_set(f), x, n);
}

std::vector<GrowthRecord> growth_sequence(const Diffeo& f, std::size_t n_max,
                                          const GridSpec& grid) {
  if (n_max < 1) throw DomainError("growth_sequence: n_max must be >= 1");
  const FixedSet fixed = fixed_set(f);
  const Diffeo::Impl& impl = f.impl();

  const std::vector<double> starts = probe_starts(grid);
  std::vector<Probe> probes(starts.size());
  for (std::size_t i = 0; i < starts.size(); ++i) probes[i] = Probe{starts[i], starts[i], KahanSum{}, false};
  std::vector<Probe> refined;  // probes injected by the doubling refreshes

  const unsigned workers = std::max(1u, grid.workers);
  std::vector<GrowthRecord> records(n_max);

  // Fresh evaluation of log (f^n)' used by the ternary refresh.
  auto product_at = [&](double x, std::size_t n, double* fx) {
    return run_product(impl, fixed, x, n, fx);
  };

  std::size_t n_done = 0;
  std::size_t next_refresh = 1;
  while (n_done < n_max) {
    const std::size_t n_stop = std::min(n_max, next_refresh);
    const std::size_t steps = n_stop - n_done;

    // Partition base probes across workers; refined probes form their own chunk.
    const std::size_t chunks = workers + (refined.empty() ? 0 : 1);
    std::vector<SegmentExtrema> extrema(chunks);
    {
      std::vector<std::thread> pool;
      const std::size_t per = (probes.size() + workers - 1) / workers;
      for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = std::min(probes.size(), static_cast<std::size_t>(w) * per);
        const std::size_t hi = std::min(probes.size(), lo + per);
        if (workers == 1) {
          advance_chunk(impl, fixed, probes.data() + lo, hi - lo, steps, extrema[w]);
        } else {
          pool.emplace_back([&, lo, hi, w] {
            advance_chunk(impl, fixed, probes.data() + lo, hi - lo, steps, extrema[w]);
          });
        }
      }
      for (auto& th : pool) th.join();
      if (!refined.empty())
        advance_chunk(impl, fixed, refined.data(), refined.size(), steps, extrema.back());
    }

    for (std::size_t k = 0; k < steps; ++k) {
      GrowthRecord& r = records[n_done + k];
      r.n = n_done + k + 1;
      r.log_sup = -std::numeric_limits<double>::infinity();
      r.log_inf = std::numeric_limits<double>::infinity();
      for (const auto& e : extrema) {
        if (e.sup.size() <= k) continue;
        if (e.sup[k] > r.log_sup || (e.sup[k] == r.log_sup && e.arg_sup[k] < r.arg_sup)) {
          r.log_sup = e.sup[k];
          r.arg_sup = e.arg_sup[k];
        }
        if (e.inf[k] < r.log_inf || (e.inf[k] == r.log_inf && e.arg_inf[k] < r.arg_inf)) {
          r.log_inf = e.inf[k];
          r.arg_inf = e.arg_inf[k];
        }
      }
      r.log_gamma = std::max(r.log_sup, -r.log_inf);
    }
    n_done = n_stop;

    // Refresh: ternary search around the best grid cell, re-seeding the probe
    // set near the current extremizers (they drift as n grows).
    if (n_done < n_max && grid.refine_iters > 0) {
      GrowthRecord& r = records[n_done - 1];
      auto refine = [&](double arg, bool maximize) {
        const auto it = std::lower_bound(starts.begin(), starts.end(), arg);
        const std::size_t idx = static_cast<std::size_t>(it - starts.begin());
        double lo = idx > 0 ? starts[idx - 1] : starts.front();
        double hi = idx + 1 < starts.size() ? starts[idx + 1] : starts.back();
        if (!(lo < hi)) return;
        for (std::size_t it2 = 0; it2 < grid.refine_iters; ++it2) {
          const double m1 = lo + (hi - lo) / 3.0;
          const double m2 = hi - (hi - lo) / 3.0;
          const double v1 = product_at(m1, n_done, nullptr);
          const double v2 = product_at(m2, n_done, nullptr);
          if ((v1 < v2) == maximize)
            lo = m1;
          else
            hi = m2;
        }
        const double xb = 0.5 * (lo + hi);
        double fx = xb;
        const double vb = product_at(xb, n_done, &fx);
        Probe np{xb, fx, KahanSum{}, false};
        np.s.reset(vb);
        if (maximize && vb > r.log_sup) {
          r.log_sup = vb;
          r.arg_sup = xb;
          r.log_gamma = std::max(r.log_gamma, vb);
          refined.push_back(np);
        } else if (!maximize && vb < r.log_inf) {
          r.log_inf = vb;
          r.arg_inf = xb;
          r.log_gamma = std::max(r.log_gamma, -vb);
          refined.push_back(np);
        }
      };
      refine(r.arg_sup, true);
      refine(r.arg_inf, false);
    }
    next_refresh = n_done * 2;
  }
  return records;
}

GammaEstimate gamma_estimate(const std::vector<GrowthRecord>& records) {
  if (records.empty()) throw DomainError("gamma_estimate: no records");
  GammaEstimate g;
  g.nth_roots.reserve(records.size());
  for (const auto& r : records)
    g.nth_roots.push_back(std::exp(r.log_gamma / static_cast<double>(r.n)));
  g.gamma = g.nth_roots.back();
  return g;
}

double orbit_integral(const Diffeo& f, double x_a, double x_b) {
  double lo = std::min(x_a, x_b), hi = std::max(x_a, x_b);
  if (!(lo >= 0.0 && hi <= 1.0)) throw DomainError("orbit_integral: endpoints outside [0,1]");
  if (lo == hi) return 0.0;
  // phi must not vanish inside; scan before integrating.
  for (int i = 0; i <= 256; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / 256.0;
    if (f.displacement(x) == 0.0)
      throw SingularIntegral("orbit_integral: phi vanishes inside the interval");
  }
  return integrate_adaptive([&](double t) { return 1.0 / std::fabs(f.displacement(t)); }, lo,
                            hi, 1e-9);
}

Claim9Result claim9_check(const Diffeo& f, const Modulus& m, double x0, std::size_t n_max) {
  if (f.provenance().constructor != "from_modulus")
    throw SpecError("claim9_check needs a from_modulus construction");
  for (const auto& [k, v] : f.provenance().params)
    if (k == "sign" && v != "contracting")
      throw SpecError("claim9_check needs the contracting construction");
  const RegularityReport rep = m.classify_regularity();
  if (!rep.alpha_increasing || !rep.ratio_over_x_decreasing ||
      rep.xlog_limit_class != XlogLimitClass::zero)
    throw SpecError("claim9_check: modulus fails the sharpness-side hypotheses");
  if (!(x0 > 0.0 && x0 <= m.domain_end()))
    throw DomainError("claim9_check: x0 must lie in (0, domain_end]");

  const FixedSet fixed = fixed_set(f);
  const Diffeo::Impl& impl = f.impl();
  Claim9Result res;
  res.n_omega.reserve(n_max);
  Probe p{x0, x0, KahanSum{}, false};
  for (std::size_t n = 1; n <= n_max; ++n) {
    step_probe(impl, fixed, p);
    const double v = static_cast<double>(n) * m.eval(std::min(p.x, m.domain_end()));
    res.n_omega.push_back(v);
    res.sup = std::max(res.sup, v);
  }
  return res;
}

}  // namespace growthlab
