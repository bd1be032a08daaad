#include "growthlab/modulus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "growthlab/errors.hpp"

namespace growthlab {

namespace {

constexpr double kBisectWidth = 1e-14;
constexpr int kBisectMaxIter = 200;

/// Log-spaced grid on (lo, hi], ascending, hi included. Used for scans and
/// majorant sampling (moduli vary fastest near 0).
std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> xs(n);
  const double llo = std::log(lo), lhi = std::log(hi);
  for (std::size_t i = 0; i < n; ++i)
    xs[i] = std::exp(llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(n - 1));
  xs.back() = hi;
  return xs;
}

}  // namespace

std::string to_string(ModulusKind kind) {
  switch (kind) {
    case ModulusKind::holder: return "holder";
    case ModulusKind::lipschitz: return "lipschitz";
    case ModulusKind::xlog: return "xlog";
    case ModulusKind::sqrtlog: return "sqrtlog";
    case ModulusKind::invlog: return "invlog";
    case ModulusKind::tabulated: return "tabulated";
  }
  return "?";
}

std::string to_string(XlogLimitClass c) {
  switch (c) {
    case XlogLimitClass::zero: return "zero";
    case XlogLimitClass::bounded: return "bounded";
    case XlogLimitClass::unbounded: return "unbounded";
  }
  return "?";
}

struct Modulus::Impl {
  ModulusKind kind = ModulusKind::lipschitz;
  double alpha = 0.0;
  double domain_end = 1.0;
  double scale = 1.0;
  std::vector<double> tab_x, tab_y;  // tabulated only

  double raw_eval(double d) const {
    switch (kind) {
      case ModulusKind::holder:
        return std::pow(d, alpha);
      case ModulusKind::lipschitz:
        return d;
      case ModulusKind::xlog:
        return d == 0.0 ? 0.0 : d * (1.0 - std::log(d));
      case ModulusKind::sqrtlog:
        return d == 0.0 ? 0.0 : d * std::sqrt(1.0 - std::log(d));
      case ModulusKind::invlog:
        return d == 0.0 ? 0.0 : 1.0 / (1.0 - std::log(d));
      case ModulusKind::tabulated: {
        const auto it = std::upper_bound(tab_x.begin(), tab_x.end(), d);
        if (it == tab_x.begin()) return tab_y.front();
        if (it == tab_x.end()) return tab_y.back();
        const std::size_t i = static_cast<std::size_t>(it - tab_x.begin());
        const double t = (d - tab_x[i - 1]) / (tab_x[i] - tab_x[i - 1]);
        return tab_y[i - 1] + t * (tab_y[i] - tab_y[i - 1]);
      }
    }
    return 0.0;
  }

  double raw_deriv(double d) const {
    switch (kind) {
      case ModulusKind::holder:
        return alpha * std::pow(d, alpha - 1.0);
      case ModulusKind::lipschitz:
        return 1.0;
      case ModulusKind::xlog:
        return -std::log(d);
      case ModulusKind::sqrtlog: {
        const double r = std::sqrt(1.0 - std::log(d));
        return r - 0.5 / r;
      }
      case ModulusKind::invlog: {
        const double l = 1.0 - std::log(d);
        return 1.0 / (d * l * l);
      }
      case ModulusKind::tabulated: {
        auto it = std::upper_bound(tab_x.begin(), tab_x.end(), d);
        if (it == tab_x.begin()) ++it;
        if (it == tab_x.end()) --it;
        const std::size_t i = static_cast<std::size_t>(it - tab_x.begin());
        return (tab_y[i] - tab_y[i - 1]) / (tab_x[i] - tab_x[i - 1]);
      }
    }
    return 0.0;
  }
};

Modulus::Modulus(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

static std::shared_ptr<Modulus::Impl> make_impl(ModulusKind kind, double domain_end,
                                                double scale) {
  if (!(domain_end > 0.0) || domain_end > 1.0)
    throw InvalidModulus("domain_end must lie in (0,1]");
  if (!(scale > 0.0)) throw InvalidModulus("scale must be positive");
  auto impl = std::make_shared<Modulus::Impl>();
  impl->kind = kind;
  impl->domain_end = domain_end;
  impl->scale = scale;
  return impl;
}

Modulus Modulus::holder(double alpha, double domain_end, double scale) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidModulus("holder exponent must be in (0,1)");
  auto impl = make_impl(ModulusKind::holder, domain_end, scale);
  impl->alpha = alpha;
  return Modulus(impl);
}

Modulus Modulus::lipschitz(double domain_end, double scale) {
  return Modulus(make_impl(ModulusKind::lipschitz, domain_end, scale));
}

Modulus Modulus::xlog(double domain_end, double scale) {
  return Modulus(make_impl(ModulusKind::xlog, domain_end, scale));
}

Modulus Modulus::sqrtlog(double domain_end, double scale) {
  return Modulus(make_impl(ModulusKind::sqrtlog, domain_end, scale));
}

Modulus Modulus::invlog(double domain_end, double scale) {
  return Modulus(make_impl(ModulusKind::invlog, domain_end, scale));
}

Modulus Modulus::tabulated(std::vector<double> deltas, std::vector<double> values,
                           double scale) {
  if (deltas.size() != values.size() || deltas.size() < 2)
    throw InvalidModulus("tabulated modulus needs >= 2 matching (delta,value) pairs");
  if (deltas.front() != 0.0) throw InvalidModulus("tabulated deltas must start at 0");
  if (values.front() != 0.0) throw InvalidModulus("tabulated modulus must have omega(0)=0");
  for (std::size_t i = 1; i < deltas.size(); ++i) {
    if (!(deltas[i] > deltas[i - 1]))
      throw InvalidModulus("tabulated deltas must be strictly increasing");
    if (values[i] < values[i - 1])
      throw InvalidModulus("tabulated values must be non-decreasing");
  }
  if (deltas.back() > 1.0) throw InvalidModulus("tabulated domain must stay within [0,1]");
  auto impl = make_impl(ModulusKind::tabulated, deltas.back(), scale);
  impl->tab_x = std::move(deltas);
  impl->tab_y = std::move(values);
  return Modulus(impl);
}

Modulus Modulus::tabulated_from_csv(const std::string& path, double scale) {
  std::ifstream in(path);
  if (!in) throw InvalidModulus("cannot open tabulated modulus file: " + path);
  std::vector<double> xs, ys;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double x, y;
    if (!(ls >> x >> y)) {
      if (first) {
        first = false;
        continue;  // header row
      }
      throw InvalidModulus("bad row in tabulated modulus file: " + line);
    }
    first = false;
    xs.push_back(x);
    ys.push_back(y);
  }
  return tabulated(std::move(xs), std::move(ys), scale);
}

ModulusKind Modulus::kind() const { return impl_->kind; }

double Modulus::alpha() const {
  if (impl_->kind != ModulusKind::holder) throw InvalidModulus("alpha only defined for holder");
  return impl_->alpha;
}

double Modulus::domain_end() const { return impl_->domain_end; }
double Modulus::scale() const { return impl_->scale; }

std::string Modulus::describe() const {
  std::ostringstream os;
  os << to_string(impl_->kind);
  if (impl_->kind == ModulusKind::holder) os << "(alpha=" << impl_->alpha << ")";
  if (impl_->scale != 1.0) os << " scale=" << impl_->scale;
  if (impl_->domain_end != 1.0) os << " domain_end=" << impl_->domain_end;
  return os.str();
}

double Modulus::eval(double delta) const {
  if (!(delta >= 0.0) || delta > impl_->domain_end * (1.0 + 1e-12))
    throw DomainError("modulus evaluated outside [0, domain_end]");
  if (delta > impl_->domain_end) delta = impl_->domain_end;
  if (delta == 0.0) return 0.0;
  return impl_->scale * impl_->raw_eval(delta);
}

double Modulus::deriv(double delta) const {
  if (!(delta > 0.0) || delta > impl_->domain_end * (1.0 + 1e-12))
    throw DomainError("modulus derivative outside (0, domain_end]");
  if (delta > impl_->domain_end) delta = impl_->domain_end;
  return impl_->scale * impl_->raw_deriv(delta);
}

double Modulus::inverse(double y) const {
  if (!(y >= 0.0)) throw DomainError("modulus inverse of a negative value");
  if (impl_->kind == ModulusKind::tabulated) {
    for (std::size_t i = 1; i < impl_->tab_y.size(); ++i)
      if (!(impl_->tab_y[i] > impl_->tab_y[i - 1]))
        throw InvalidModulus("inverse requires a strictly increasing tabulated modulus");
  }
  if (y == 0.0) return 0.0;
  const double end = impl_->domain_end;
  if (y >= eval(end)) return end;  // clamping rule
  double lo = 0.0, hi = end;
  const double tol = 1e-13 * std::max(1.0, y);
  for (int it = 0; it < kBisectMaxIter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // no representable midpoint left
    const double v = eval(mid);
    if (v < y)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= kBisectWidth && std::fabs(eval(0.5 * (lo + hi)) - y) <= tol) break;
  }
  return 0.5 * (lo + hi);
}

Modulus Modulus::concave_majorant(std::size_t grid_size) const {
  if (grid_size < 3) throw InvalidModulus("concave majorant needs grid_size >= 3");
  const double end = impl_->domain_end;
  // Log-spaced sample denser near 0, with 0 itself prepended.
  std::vector<double> xs = log_grid(end * 1e-8, end, grid_size - 1);
  xs.insert(xs.begin(), 0.0);
  std::vector<double> ys(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = eval(xs[i]);

  // Upper convex hull of the sample points (monotone chain; x already sorted).
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2], b = hull[hull.size() - 1];
      const double cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a]);
      if (cross >= 0.0)
        hull.pop_back();  // b lies on or below chord a->i
      else
        break;
    }
    hull.push_back(i);
  }

  // Tabulate the hull on the full grid so callers see the same sample points.
  std::vector<double> out(xs.size());
  std::size_t seg = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    while (seg + 1 < hull.size() && xs[hull[seg + 1]] < xs[i]) ++seg;
    const std::size_t a = hull[seg], b = hull[std::min(seg + 1, hull.size() - 1)];
    if (a == b || xs[b] == xs[a]) {
      out[i] = ys[a];
    } else {
      const double t = (xs[i] - xs[a]) / (xs[b] - xs[a]);
      out[i] = ys[a] + t * (ys[b] - ys[a]);
    }
  }
  out[0] = 0.0;
  // Guard against interpolation rounding dipping below the samples.
  for (std::size_t i = 1; i < out.size(); ++i) out[i] = std::max(out[i], ys[i]);
  return tabulated(std::move(xs), std::move(out), 1.0);
}

double Modulus::omega_cap(double z) const {
  const double end = impl_->domain_end;
  const double zmax = end * eval(end);
  if (!(z >= 0.0) || z > zmax * (1.0 + 1e-12))
    throw DomainError("omega_cap argument outside [0, domain_end*omega(domain_end)]");
  if (z == 0.0) return 0.0;
  if (z >= zmax) return end;
  auto h = [&](double x) { return x * eval(x); };
  double lo = 0.0, hi = end;
  const double tol = 1e-13 * std::max(1.0, z);
  for (int it = 0; it < kBisectMaxIter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (h(mid) < z)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= kBisectWidth && std::fabs(h(0.5 * (lo + hi)) - z) <= tol) break;
  }
  return 0.5 * (lo + hi);
}

double Modulus::lambda(double x) const {
  if (!(x >= 1.0)) throw DomainError("lambda requires x >= 1");
  if (1.0 / x > impl_->domain_end * (1.0 + 1e-12))
    throw DomainError("lambda requires 1/x within the modulus domain");
  return x * eval(std::min(1.0 / x, impl_->domain_end));
}

RegularityReport Modulus::classify_regularity(std::size_t scan_grid) const {
  if (scan_grid < 16) throw DomainError("classify_regularity needs scan_grid >= 16");
  RegularityReport rep;
  rep.scan_grid = scan_grid;
  const double end = impl_->domain_end;
  // Tabulated data carries no information below its first positive knot.
  const double lo = impl_->kind == ModulusKind::tabulated
                        ? std::max(impl_->tab_x[1], end * 1e-12)
                        : end * 1e-12;
  const std::vector<double> xs = log_grid(lo, end, scan_grid);
  std::vector<double> ws(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) ws[i] = eval(xs[i]);

  const double slack = 1e-12;
  const double strict = 1e-10;  // constants do not count as strictly monotone
  // Longest prefix of the grid (from 0 upward) on which omega/x^a is strictly
  // monotone in the requested direction.
  auto prefix_cutoff = [&](double a, bool decreasing) -> double {
    double prev = ws[0] / std::pow(xs[0], a);
    std::size_t ok = 0;
    for (std::size_t i = 1; i < xs.size(); ++i) {
      const double r = ws[i] / std::pow(xs[i], a);
      const bool good = decreasing ? (r < prev * (1.0 - strict)) : (r > prev * (1.0 + strict));
      if (!good) break;
      prev = r;
      ok = i;
    }
    // Require the certified window to span at least a quarter of the grid.
    if (ok + 1 < xs.size() / 4) return 0.0;
    return xs[ok];
  };

  // Candidate exponents 0.1..0.9; report the middle of the certified range.
  auto certify = [&](bool decreasing) -> std::optional<AlphaWindow> {
    std::vector<std::pair<double, double>> hits;
    for (int k = 1; k <= 9; ++k) {
      const double a = 0.1 * k;
      const double cut = prefix_cutoff(a, decreasing);
      if (cut > 0.0) hits.emplace_back(a, cut);
    }
    if (hits.empty()) return std::nullopt;
    const double mid_alpha = 0.5 * (hits.front().first + hits.back().first);
    const double cut = prefix_cutoff(mid_alpha, decreasing);
    if (cut > 0.0) return AlphaWindow{mid_alpha, cut};
    return AlphaWindow{hits.front().first, hits.front().second};
  };
  rep.alpha_monotone = certify(true);
  rep.alpha_increasing = certify(false);

  {
    double prev = ws[0] / xs[0];
    bool dec = true;
    for (std::size_t i = 1; i < xs.size(); ++i) {
      const double r = ws[i] / xs[i];
      if (r > prev * (1.0 + slack)) {
        dec = false;
        break;
      }
      prev = r;
    }
    rep.ratio_over_x_decreasing = dec;
  }

  {
    // Trend of omega(x)/(x log(e/x)) as x -> 0, judged against the value at the
    // top of the grid (ratios, so scale cancels).
    auto rho = [&](double x) { return eval(x) / (x * (1.0 - std::log(x))); };
    const double ref = rho(xs.back());
    const double tail = rho(xs.front());
    if (tail >= 2.0 * ref)
      rep.xlog_limit_class = XlogLimitClass::unbounded;
    else if (tail <= 0.5 * ref)
      rep.xlog_limit_class = XlogLimitClass::zero;
    else
      rep.xlog_limit_class = XlogLimitClass::bounded;
  }

  if (rep.alpha_monotone) {
    // Claim-4 shape check: Lambda'(x) >= (1-alpha) omega(1/x), finite differences.
    const double a = rep.alpha_monotone->alpha;
    const double cut = rep.alpha_monotone->cutoff;
    bool ok = true;
    const std::vector<double> inv = log_grid(1.0 / cut, 0.5 / lo, 64);
    for (const double x : inv) {
      const double h = x * 1e-6;
      if (1.0 / (x - h) > end) continue;
      const double dl = (lambda(x + h) - lambda(x - h)) / (2.0 * h);
      if (dl < (1.0 - a) * eval(1.0 / x) * (1.0 - 1e-6)) {
        ok = false;
        break;
      }
    }
    rep.claim4_verified = ok;
  }
  return rep;
}

}  // namespace growthlab
