#pragma once

#include <cstddef>
#include <vector>

#include "growthlab/diffeo.hpp"
#include "growthlab/modulus.hpp"

namespace growthlab {

/// Orbit x0, f(x0), ..., f^n(x0) with compensated prefix sums of log f'.
/// log_deriv_prefix[j] = log (f^j)'(x0); size n+1 with [0] = 0.
struct Trajectory {
  std::vector<double> points;
  std::vector<double> log_deriv_prefix;
};

Trajectory orbit(const Diffeo& f, double x0, std::size_t n);

/// log (f^n)'(x) = sum of log f' along the orbit, compensated summation.
double log_deriv_product(const Diffeo& f, double x, std::size_t n);

/// Per-n growth data. log_sup/log_inf are the extrema of log (f^n)' over the
/// probe set; grid maxima, i.e. lower bounds on the true sup and upper bounds
/// on the true inf. log_gamma = max(log_sup, -log_inf).
struct GrowthRecord {
  std::size_t n = 0;
  double log_gamma = 0.0;
  double log_sup = 0.0;
  double log_inf = 0.0;
  double arg_sup = 0.0;
  double arg_inf = 0.0;
};

struct GridSpec {
  std::size_t base_points = 4096;  // probe count (log-spaced near 0 and 1 + uniform)
  std::size_t refine_iters = 40;   // ternary steps around the best cell per refresh
  std::vector<double> seeds;       // extra probe starts (orbit anchors etc.)
  unsigned workers = 1;            // probe partitions; results identical for any value
};

/// Gamma_n for n = 1..n_max over a probe grid, all orbits advanced
/// incrementally; the probe set is refreshed around the current extremizers at
/// every doubling of n. Deterministic for any worker count.
std::vector<GrowthRecord> growth_sequence(const Diffeo& f, std::size_t n_max,
                                          const GridSpec& grid = {});

struct GammaEstimate {
  double gamma = 1.0;                 // exp(log Gamma_{n_max} / n_max)
  std::vector<double> nth_roots;      // per-record Gamma_n^{1/n} for trend inspection
};

GammaEstimate gamma_estimate(const std::vector<GrowthRecord>& records);

/// Adaptive quadrature of int dt/|phi(t)| between two orbit points.
/// Throws SingularIntegral if phi vanishes inside.
double orbit_integral(const Diffeo& f, double x_a, double x_b);

struct Claim9Result {
  double sup = 0.0;              // max_n n * omega(x_n)
  std::vector<double> n_omega;   // value per n, 1-based
};

/// sup_n n*omega(x_n) along the orbit of a from_modulus (contracting)
/// construction whose modulus satisfies the sharpness-side hypotheses.
Claim9Result claim9_check(const Diffeo& f, const Modulus& m, double x0, std::size_t n_max);

}  // namespace growthlab
