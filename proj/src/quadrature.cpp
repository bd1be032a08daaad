#include "growthlab/quadrature.hpp"

#include <cmath>
#include <utility>

#include "growthlab/errors.hpp"
#include "growthlab/kahan.hpp"

namespace growthlab {

namespace {

// Gauss7/Kronrod15 abscissae and weights on [-1, 1] (positive half).
// Row: node, Gauss weight (0 where Kronrod-only), Kronrod weight.
constexpr double kG7K15[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0, 0.204432940075298},
    {0.586087235467691, 0.0, 0.169004726639267},
    {0.864864423359769, 0.0, 0.104790010322250},
    {0.991455371120813, 0.0, 0.022935322010529},
};

double g7k15(const std::function<double(double)>& f, double a, double b, double& err) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double y0 = f(mid);
  double g7 = kG7K15[0][1] * y0;
  double k15 = kG7K15[0][2] * y0;
  for (int i = 1; i < 8; ++i) {
    const double dx = half * kG7K15[i][0];
    const double yi = f(mid + dx) + f(mid - dx);
    g7 += kG7K15[i][1] * yi;
    k15 += kG7K15[i][2] * yi;
  }
  g7 *= half;
  k15 *= half;
  // (200|G-K|)^1.5, the classic sharpened estimate
  err = 200.0 * std::fabs(g7 - k15);
  err *= std::sqrt(err);
  return k15;
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double abs_tol, int max_intervals) {
  if (a == b) return 0.0;
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }
  std::vector<std::pair<double, double>> stack;
  stack.reserve(64);
  stack.emplace_back(a, b);
  KahanSum sum;
  double scale = 0.0;  // running magnitude for the relative test
  int used = 0;
  while (!stack.empty()) {
    const auto [lo, hi] = stack.back();
    stack.pop_back();
    double err = 0.0;
    const double s = g7k15(f, lo, hi, err);
    scale = std::max(scale, std::fabs(s));
    if (err <= rel_tol * std::max(scale, std::fabs(s)) || err <= abs_tol ||
        hi - lo <= 1e-307) {
      sum += s;
      continue;
    }
    if (++used >= max_intervals)
      throw SingularIntegral("adaptive quadrature did not converge (possible singularity)");
    const double mid = 0.5 * (lo + hi);
    stack.emplace_back(lo, mid);
    stack.emplace_back(mid, hi);
  }
  return sign * sum.value();
}

PrefixIntegral::PrefixIntegral(std::function<double(double)> g, double b, double rel_tol)
    : g_(std::move(g)), b_(b), rel_tol_(rel_tol) {
  if (!(b > 0.0)) throw DomainError("PrefixIntegral: upper end must be positive");

  // Geometric panels [b/2^{k+1}, b/2^k] down to ~1e-15 * b.
  constexpr int kDepth = 50;
  floor_ = std::ldexp(b, -kDepth);

  struct Raw {
    double lo, hi;
    std::array<double, kNodes> prefix;  // integral from lo to node i
  };
  std::vector<Raw> raws;
  raws.reserve(kDepth);
  double hi = b;
  for (int k = 0; k < kDepth; ++k) {
    const double lo = 0.5 * hi;
    Raw r{lo, hi, {}};
    // Chebyshev-Lobatto nodes ascending in x
    std::array<double, kNodes> xs{};
    for (int i = 0; i < kNodes; ++i) {
      const double t = -std::cos(M_PI * i / (kNodes - 1));
      xs[i] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * t;
    }
    KahanSum acc;
    r.prefix[0] = 0.0;
    for (int i = 1; i < kNodes; ++i) {
      acc += integrate_adaptive(g_, xs[i - 1], xs[i], rel_tol_);
      r.prefix[i] = acc.value();
    }
    raws.push_back(r);
    hi = lo;
  }

  // Tail below the deepest panel.
  const double tail = integrate_adaptive(g_, 0.0, floor_, rel_tol_);

  // Accumulate bases from the bottom up and fit Chebyshev coefficients of the
  // within-panel prefix.
  panels_.resize(raws.size());
  double base = tail;
  for (int k = static_cast<int>(raws.size()) - 1; k >= 0; --k) {
    const Raw& r = raws[static_cast<std::size_t>(k)];
    Panel& p = panels_[static_cast<std::size_t>(raws.size()) - 1 - static_cast<std::size_t>(k)];
    p.lo = r.lo;
    p.hi = r.hi;
    p.base = base;
    // Discrete Chebyshev transform on Lobatto nodes.
    constexpr int n = kNodes - 1;
    for (int j = 0; j < kNodes; ++j) {
      double c = 0.0;
      for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 0.5 : 1.0;
        // node i corresponds to t = -cos(pi i / n); T_j(t) = cos(j * acos(t))
        const double tj = std::cos(j * M_PI * (1.0 - static_cast<double>(i) / n));
        c += w * r.prefix[static_cast<std::size_t>(i)] * tj;
      }
      c *= 2.0 / n;
      if (j == 0 || j == n) c *= 0.5;
      p.coeff[static_cast<std::size_t>(j)] = c;
    }
    base += r.prefix[kNodes - 1];
  }
  total_ = base;
}

double PrefixIntegral::operator()(double x) const {
  if (!(x >= 0.0) || x > b_ * (1.0 + 1e-12))
    throw DomainError("PrefixIntegral: argument outside [0, upper]");
  if (x > b_) x = b_;
  if (x == 0.0) return 0.0;
  if (x < floor_) return integrate_adaptive(g_, 0.0, x, rel_tol_);
  // Panels are ascending; find the one containing x by its dyadic level.
  int idx = static_cast<int>(std::floor(std::log2(b_ / x)));
  idx = static_cast<int>(panels_.size()) - 1 - idx;
  if (idx < 0) idx = 0;
  if (idx >= static_cast<int>(panels_.size())) idx = static_cast<int>(panels_.size()) - 1;
  while (idx > 0 && x < panels_[static_cast<std::size_t>(idx)].lo) --idx;
  while (idx + 1 < static_cast<int>(panels_.size()) &&
         x > panels_[static_cast<std::size_t>(idx)].hi)
    ++idx;
  const Panel& p = panels_[static_cast<std::size_t>(idx)];
  const double t = (2.0 * x - (p.lo + p.hi)) / (p.hi - p.lo);
  // Clenshaw
  double b1 = 0.0, b2 = 0.0;
  for (int j = kNodes - 1; j >= 1; --j) {
    const double tmp = 2.0 * t * b1 - b2 + p.coeff[static_cast<std::size_t>(j)];
    b2 = b1;
    b1 = tmp;
  }
  const double val = t * b1 - b2 + p.coeff[0];
  return p.base + val;
}

}  // namespace growthlab
