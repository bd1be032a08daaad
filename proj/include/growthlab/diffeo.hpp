#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "growthlab/modulus.hpp"

namespace growthlab {

/// Which side of the identity the construction sits on. Contracting maps push
/// orbits toward 0 (f < x on (0,1)), expanding maps push them toward 1.
enum class MapSign { contracting, expanding };

/// Structured provenance: which constructor produced the map and with which
/// parameters (certified quantities such as a(eps) included).
struct Provenance {
  std::string constructor;
  std::vector<std::pair<std::string, std::string>> params;
  std::string to_string() const;
};

/// C^1 orientation-preserving self-map of [0,1] fixing the endpoints.
/// Immutable value type; eval/deriv/displacement are pure and thread-safe.
class Diffeo {
 public:
  double eval(double x) const;
  double operator()(double x) const { return eval(x); }
  double deriv(double x) const;
  /// phi(x) = f(x) - x, evaluated in closed form where the construction allows
  /// (avoids cancellation near parabolic fixed points).
  double displacement(double x) const;

  /// Representative fixed points (always contains 0 and 1). Intervals on which
  /// the map is the identity are listed separately.
  const std::vector<double>& fixed_points() const;
  const std::vector<std::pair<double, double>>& identity_regions() const;
  const Provenance& provenance() const;
  std::string description() const { return provenance().to_string(); }

  // -- constructors ---------------------------------------------------------

  static Diffeo identity();
  /// Test map f(x) = 2x/(1+x): fixes 0,1 with f'(0)=2 (deliberately
  /// non-tangential; gamma(f) = 2).
  static Diffeo moebius_test();

  /// f0(x) = x -/+ int_0^x omega on [0,eps], mirrored near 1 so that f0(1)=1,
  /// f0'(1)=1, with a quintic C^1 bridge across [eps,1-eps] that is grid-certified
  /// monotone and fixed-point free. Requires omega(eps) < 1 and eps < 1/2.
  static Diffeo from_modulus(const Modulus& m, double eps, MapSign sign);

  /// The oscillatory sharpness frame f(x) = x/(1+x) + x^{2+eps} omega(x) sin(2pi/x)
  /// on [0, a(eps)], glued to the identity. a(eps) is the largest halving of
  /// 1/k_min whose grid scan certifies positivity of f', absence of interior
  /// fixed points, and a bounded derivative modulus; the certified value is
  /// recorded in the provenance.
  static Diffeo sharpness_family(const Modulus& m, double eps, std::size_t k_min);

  struct PastedBlock {
    double a = 0.0;       // block start (frame origin)
    double b = 0.0;       // block end (glued back to identity here)
    double epsilon = 0.0; // frame exponent
  };
  /// Pasting of sharpness frames on disjoint blocks [a_k, b_k] descending toward
  /// 0, identity elsewhere. Each block holds the frame translated to start at
  /// a_k plus a monotone C^1 glue with Psi(b_k)=b_k, Psi'(b_k)=1.
  static Diffeo paste(const Modulus& m, std::size_t k_min,
                      const std::vector<PastedBlock>& blocks);

  /// Numerical inverse of f as a map (eval by bisection+Newton, derivative via
  /// 1/f'(f^{-1})).
  static Diffeo inverse_map(const Diffeo& f);
  static Diffeo compose(const Diffeo& outer, const Diffeo& inner);

  // -- operations -----------------------------------------------------------

  /// x with |f(x) - y| <= 1e-13: monotone bisection refined by Newton steps.
  double inverse_eval(double y) const;

  class Impl;
  explicit Diffeo(std::shared_ptr<const Impl> impl);
  const Impl& impl() const { return *impl_; }

 private:
  std::shared_ptr<const Impl> impl_;
};

/// Empirical modulus of continuity of f' over [x_lo, x_hi]: for each delta the
/// exact max of |f'(x)-f'(y)| over sampled pairs with |x-y| <= delta
/// (sliding-window sweep over a sorted grid of x_grid_size points).
std::vector<std::pair<double, double>> estimate_derivative_modulus(
    const Diffeo& f, const std::vector<double>& delta_grid, std::size_t x_grid_size,
    double x_lo = 0.0, double x_hi = 1.0);

/// C(f) = max over the delta grid of omega_hat_{f'}(delta) / omega(delta).
/// +inf signals membership failure at the scan resolution.
double membership_constant(const Diffeo& f, const Modulus& m,
                           const std::vector<double>& delta_grid, std::size_t x_grid_size,
                           double x_lo = 0.0, double x_hi = 1.0);

}  // namespace growthlab
