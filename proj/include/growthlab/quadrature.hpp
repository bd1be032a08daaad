#pragma once

#include <array>
#include <functional>
#include <vector>

namespace growthlab {

/// Adaptive Gauss7/Kronrod15 integration of f over [a, b].
/// Splits until the Kronrod error estimate meets rel_tol (against the running
/// total) or abs_tol. Throws SingularIntegral if the subdivision budget is
/// exhausted without convergence.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-12, double abs_tol = 1e-300,
                          int max_intervals = 4000);

/// Cumulative integral F(x) = int_0^x g dt for a non-negative integrand on (0, b],
/// evaluable in O(log #panels). Panels are halved geometrically toward 0 so that
/// integrands with unbounded derivatives at 0 (delta^alpha, 1/log(e/delta)) stay
/// analytic on every panel; on each panel the antiderivative is stored as a
/// Chebyshev series. Below the deepest panel the integral falls back to direct
/// adaptive quadrature.
class PrefixIntegral {
 public:
  PrefixIntegral() = default;
  PrefixIntegral(std::function<double(double)> g, double b, double rel_tol = 1e-13);

  double operator()(double x) const;
  double upper() const { return b_; }
  double total() const { return total_; }

 private:
  static constexpr int kNodes = 24;
  struct Panel {
    double lo, hi;
    double base;  // F(lo)
    std::array<double, kNodes> coeff;
  };

  std::function<double(double)> g_;
  std::vector<Panel> panels_;  // ascending in lo
  double b_ = 0.0;
  double floor_ = 0.0;  // below this, direct quadrature
  double total_ = 0.0;
  double rel_tol_ = 1e-13;
};

}  // namespace growthlab
