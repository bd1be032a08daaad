#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace growthlab {

enum class ModulusKind { holder, lipschitz, xlog, sqrtlog, invlog, tabulated };

std::string to_string(ModulusKind kind);

enum class XlogLimitClass { zero, bounded, unbounded };

std::string to_string(XlogLimitClass c);

/// Certified exponent window: omega(x)/x^alpha is monotone on (0, cutoff).
struct AlphaWindow {
  double alpha = 0.0;
  double cutoff = 0.0;
};

/// Grid-certified regularity facts about a modulus. Absent optionals mean the
/// property could not be certified at the scan resolution, not that it fails.
struct RegularityReport {
  std::optional<AlphaWindow> alpha_monotone;    // omega/x^a decreasing (upper-bound theorems)
  std::optional<AlphaWindow> alpha_increasing;  // omega/x^a increasing (sharpness theorems)
  bool ratio_over_x_decreasing = false;         // omega(x)/x non-increasing on the grid
  XlogLimitClass xlog_limit_class = XlogLimitClass::bounded;
  bool claim4_verified = false;  // d/dx[x omega(1/x)] >= (1-alpha) omega(1/x) on the grid
  std::size_t scan_grid = 0;
};

/// A modulus of continuity: non-decreasing, omega(0) = 0, subadditive on
/// [0, domain_end]. Immutable after construction; all operations are pure.
class Modulus {
 public:
  static Modulus holder(double alpha, double domain_end = 1.0, double scale = 1.0);
  static Modulus lipschitz(double domain_end = 1.0, double scale = 1.0);
  static Modulus xlog(double domain_end = 1.0, double scale = 1.0);     // d log(e/d)
  static Modulus sqrtlog(double domain_end = 1.0, double scale = 1.0);  // d sqrt(log(e/d))
  static Modulus invlog(double domain_end = 1.0, double scale = 1.0);   // 1/log(e/d)
  /// Piecewise-linear through (deltas[i], values[i]); deltas strictly increasing
  /// from 0, values non-decreasing from 0.
  static Modulus tabulated(std::vector<double> deltas, std::vector<double> values,
                           double scale = 1.0);
  /// Two-column CSV (delta,value); a non-numeric first line is skipped as a header.
  static Modulus tabulated_from_csv(const std::string& path, double scale = 1.0);

  ModulusKind kind() const;
  double alpha() const;  // holder exponent; throws for other kinds
  double domain_end() const;
  double scale() const;
  std::string describe() const;

  /// omega(delta). Throws DomainError outside [0, domain_end].
  double eval(double delta) const;
  double operator()(double delta) const { return eval(delta); }

  /// One-sided derivative omega'(delta) for delta > 0 (closed form for built-in
  /// kinds, segment slope for tabulated). May be +inf as delta -> 0.
  double deriv(double delta) const;

  /// omega^{-1}(y) by bisection; clamps to domain_end for y >= omega(domain_end).
  /// Requires strict monotonicity (throws InvalidModulus for flat tabulated data).
  double inverse(double y) const;

  /// Least concave majorant of the sampled graph on a log-spaced grid of
  /// grid_size points (upper convex hull), returned as a tabulated modulus.
  Modulus concave_majorant(std::size_t grid_size) const;

  /// Omega(z): inverse of x -> x*omega(x), domain [0, domain_end*omega(domain_end)].
  double omega_cap(double z) const;

  /// Lambda(x) = x * omega(1/x) for x >= 1 with 1/x in the domain.
  double lambda(double x) const;

  RegularityReport classify_regularity(std::size_t scan_grid = 512) const;

 private:
  struct Impl;
  explicit Modulus(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

}  // namespace growthlab
