#include "growthlab/diffeo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <sstream>

#include "growthlab/errors.hpp"
#include "growthlab/quadrature.hpp"

namespace growthlab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr std::size_t kCertGrid = 1 << 14;  // construction-time certification grid

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void check_coord(double x, const char* who) {
  if (!(x >= -1e-12) || x > 1.0 + 1e-12) throw DomainError(std::string(who) + ": coordinate outside [0,1]");
}

/// sin(2pi/x), cos(2pi/x). Below x = 1e-6 the argument is reduced mod 1 in
/// double-double arithmetic; a naive 2pi/x loses the phase there.
void osc_trig(double x, double& s, double& c) {
  if (x >= 1e-6) {
    const double a = kTwoPi / x;
    s = std::sin(a);
    c = std::cos(a);
    return;
  }
  if (x < 1e-15) {  // phase unresolvable, amplitude factor ~1e-30 anyway
    s = 0.0;
    c = 1.0;
    return;
  }
  const double r = 1.0 / x;
  const double rlo = -std::fma(r, x, -1.0) / x;  // 1/x = r + rlo
  double t = (r - std::floor(r)) + rlo;
  t -= std::floor(t);
  const double ang = kTwoPi * t;
  s = std::sin(ang);
  c = std::cos(ang);
}

/// Log-spaced ascending grid, hi included.
std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> xs(n);
  const double llo = std::log(lo), lhi = std::log(hi);
  for (std::size_t i = 0; i < n; ++i)
    xs[i] = std::exp(llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(n - 1));
  xs.back() = hi;
  return xs;
}

/// Sliding-window sweep: max over pairs |x_i - x_j| <= delta of |d_i - d_j|.
/// xs ascending.
double omega_hat_sweep(const std::vector<double>& xs, const std::vector<double>& ds,
                       double delta) {
  double best = 0.0;
  std::deque<std::size_t> maxq, minq;
  std::size_t j = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    while (j < xs.size() && xs[j] - xs[i] <= delta) {
      while (!maxq.empty() && ds[maxq.back()] <= ds[j]) maxq.pop_back();
      maxq.push_back(j);
      while (!minq.empty() && ds[minq.back()] >= ds[j]) minq.pop_back();
      minq.push_back(j);
      ++j;
    }
    while (!maxq.empty() && maxq.front() < i) maxq.pop_front();
    while (!minq.empty() && minq.front() < i) minq.pop_front();
    if (!maxq.empty() && !minq.empty()) best = std::max(best, ds[maxq.front()] - ds[minq.front()]);
  }
  return best;
}

}  // namespace

std::string Provenance::to_string() const {
  std::ostringstream os;
  os << constructor;
  if (!params.empty()) {
    os << "(";
    bool first = true;
    for (const auto& [k, v] : params) {
      if (!first) os << ", ";
      first = false;
      os << k << "=" << v;
    }
    os << ")";
  }
  return os.str();
}

class Diffeo::Impl {
 public:
  virtual ~Impl() = default;
  virtual double eval(double x) const = 0;
  virtual double deriv(double x) const = 0;
  virtual double displacement(double x) const { return eval(x) - x; }

  Provenance prov;
  std::vector<double> fixed{0.0, 1.0};
  std::vector<std::pair<double, double>> id_regions;
};

Diffeo::Diffeo(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

double Diffeo::eval(double x) const {
  check_coord(x, "eval");
  return impl_->eval(std::clamp(x, 0.0, 1.0));
}

double Diffeo::deriv(double x) const {
  check_coord(x, "deriv");
  return impl_->deriv(std::clamp(x, 0.0, 1.0));
}

double Diffeo::displacement(double x) const {
  check_coord(x, "displacement");
  return impl_->displacement(std::clamp(x, 0.0, 1.0));
}

const std::vector<double>& Diffeo::fixed_points() const { return impl_->fixed; }
const std::vector<std::pair<double, double>>& Diffeo::identity_regions() const {
  return impl_->id_regions;
}
const Provenance& Diffeo::provenance() const { return impl_->prov; }

// -- identity / moebius -------------------------------------------------------

namespace {

class IdentityImpl final : public Diffeo::Impl {
 public:
  IdentityImpl() {
    prov.constructor = "identity";
    id_regions = {{0.0, 1.0}};
  }
  double eval(double x) const override { return x; }
  double deriv(double) const override { return 1.0; }
  double displacement(double) const override { return 0.0; }
};

class MoebiusImpl final : public Diffeo::Impl {
 public:
  MoebiusImpl() { prov.constructor = "moebius_test"; }
  double eval(double x) const override { return 2.0 * x / (1.0 + x); }
  double deriv(double x) const override {
    const double d = 1.0 + x;
    return 2.0 / (d * d);
  }
  double displacement(double x) const override { return x * (1.0 - x) / (1.0 + x); }
};

}  // namespace

Diffeo Diffeo::identity() { return Diffeo(std::make_shared<IdentityImpl>()); }
Diffeo Diffeo::moebius_test() { return Diffeo(std::make_shared<MoebiusImpl>()); }

// -- f0 = x -/+ int_0^x omega -------------------------------------------------

namespace {

class FromModulusImpl final : public Diffeo::Impl {
 public:
  FromModulusImpl(const Modulus& m, double eps, MapSign sign)
      : m_(m), eps_(eps), contracting_(sign == MapSign::contracting) {
    if (!(eps > 0.0 && eps < 0.5)) throw ConstructionError("from_modulus: eps must be in (0,1/2)");
    if (eps > m.domain_end() * (1.0 + 1e-12))
      throw ConstructionError("from_modulus: eps exceeds the modulus domain");
    if (!(m.eval(eps) < 1.0))
      throw ConstructionError("from_modulus: omega(eps) >= 1, derivative would vanish");
    phi_ = PrefixIntegral([mm = m_](double t) { return t == 0.0 ? 0.0 : mm.eval(t); }, eps);
    w_eps_ = m_.eval(eps);
    phi_eps_ = phi_(eps);
    // Certify the quintic bridge: monotone, no interior fixed points.
    for (std::size_t i = 0; i <= 4096; ++i) {
      const double x = eps_ + (1.0 - 2.0 * eps_) * static_cast<double>(i) / 4096.0;
      if (!(deriv(x) > 0.0)) throw ConstructionError("from_modulus: bridge not monotone");
      const double d = displacement(x);
      if (contracting_ ? !(d < 0.0) : !(d > 0.0))
        throw ConstructionError("from_modulus: bridge has an interior fixed point");
    }
    prov.constructor = "from_modulus";
    prov.params = {{"modulus", m_.describe()},
                   {"eps", fmt(eps_)},
                   {"sign", contracting_ ? "contracting" : "expanding"}};
  }

  double eval(double x) const override { return x + displacement(x); }

  double deriv(double x) const override {
    const double s = contracting_ ? 1.0 : -1.0;
    if (x <= eps_) return 1.0 - s * m_.eval(x);
    if (x >= 1.0 - eps_) return 1.0 + s * m_.eval(1.0 - x);
    const double t = (x - eps_) / (1.0 - 2.0 * eps_);
    // bridge: f' = 1 + s*omega(eps)*(6t^2 - 4t^3 - 1); hits 1 -/+ omega(eps) at the joints
    return 1.0 + s * w_eps_ * (t * t * (6.0 - 4.0 * t) - 1.0);
  }

  double displacement(double x) const override {
    const double s = contracting_ ? -1.0 : 1.0;
    if (x <= eps_) return s * phi_(x);
    if (x >= 1.0 - eps_) return s * phi_(1.0 - x);
    const double h = 1.0 - 2.0 * eps_;
    const double t = (x - eps_) / h;
    // integral of the bridge derivative offset: G(t) = 2t^3 - t^4 - t, G(0)=G(1)=0
    const double g = t * (t * t * (2.0 - t) - 1.0);
    return s * (phi_eps_ - w_eps_ * h * g);
  }

 private:
  Modulus m_;
  double eps_;
  bool contracting_;
  PrefixIntegral phi_;
  double w_eps_ = 0.0, phi_eps_ = 0.0;
};

}  // namespace

Diffeo Diffeo::from_modulus(const Modulus& m, double eps, MapSign sign) {
  return Diffeo(std::make_shared<FromModulusImpl>(m, eps, sign));
}

// -- sharpness frame and pasting ----------------------------------------------

namespace {

/// The oscillatory frame on [0, a]: f(x) = x/(1+x) + x^{2+eps} omega(x) sin(2pi/x).
struct SharpFrame {
  Modulus m;
  double eps;
  std::uint64_t K;  // a = 1/K
  double a;

  double eval(double x) const {
    if (x <= 0.0) return 0.0;
    double s, c;
    osc_trig(x, s, c);
    return x / (1.0 + x) + std::pow(x, 2.0 + eps) * m.eval(x) * s;
  }

  double deriv(double x) const {
    if (x <= 0.0) return 1.0;
    double s, c;
    osc_trig(x, s, c);
    const double w = m.eval(x);
    const double dw = m.deriv(x);
    const double d1 = 1.0 + x;
    return 1.0 / (d1 * d1) + (2.0 + eps) * std::pow(x, 1.0 + eps) * w * s +
           std::pow(x, 2.0 + eps) * dw * s - kTwoPi * std::pow(x, eps) * w * c;
  }

  double displacement(double x) const {
    if (x <= 0.0) return 0.0;
    double s, c;
    osc_trig(x, s, c);
    return -x * x / (1.0 + x) + std::pow(x, 2.0 + eps) * m.eval(x) * s;
  }
};

/// Grid certification of the paper's three frame conditions on (0, a]:
/// f' > 0, no interior fixed points, derivative modulus bounded at scan scales.
bool certify_frame(const SharpFrame& fr, double c3_cap) {
  const double a = fr.a;
  std::vector<double> xs = log_grid(a * 1e-6, a, kCertGrid);
  // The oscillation's extreme phases sit at 1/m and 2/(2m+1); include them exactly.
  for (std::uint64_t mm = fr.K; mm < fr.K + 4096; ++mm) {
    xs.push_back(1.0 / static_cast<double>(mm));
    xs.push_back(2.0 / static_cast<double>(2 * mm + 1));
  }
  std::sort(xs.begin(), xs.end());
  std::vector<double> ds(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = fr.deriv(xs[i]);
    if (!(d > 0.0)) return false;                      // condition 1
    if (!(fr.displacement(xs[i]) < 0.0)) return false; // condition 2
    ds[i] = d;
  }
  // Condition 3 at scan scales [a^2/2, a]: full swings of the oscillation are
  // separated by ~x^2/2, so these are the scales the frame itself generates.
  const std::vector<double> deltas = log_grid(0.5 * a * a, a, 16);
  for (const double delta : deltas) {
    const double w = fr.m.eval(std::min(delta, fr.m.domain_end()));
    if (w <= 0.0) return false;
    if (omega_hat_sweep(xs, ds, delta) / w > c3_cap) return false;
  }
  return true;
}

/// Find the largest halving a = 1/(k_min 2^j) whose scan certifies, with a <= fit_cap.
SharpFrame make_frame(const Modulus& m, double eps, std::size_t k_min, double fit_cap) {
  if (!(eps > 0.0 && eps < 1.0)) throw ConstructionError("sharpness: eps must be in (0,1)");
  if (k_min < 2) throw ConstructionError("sharpness: k_min must be >= 2");
  constexpr double c3_cap = 256.0;  // absolute cap on the scan-scale membership ratio
  std::uint64_t K = k_min;
  while (true) {
    const double a = 1.0 / static_cast<double>(K);
    if (a < 1e-6) throw ConstructionError("sharpness: no admissible a(eps) above 1e-6");
    if (a <= fit_cap && a <= m.domain_end() * (1.0 + 1e-12)) {
      SharpFrame fr{m, eps, K, a};
      if (certify_frame(fr, c3_cap)) return fr;
    }
    K *= 2;
  }
}

/// Displacement-form cubic glue psi on [a,b]: psi(a)=d0, psi'(a)=m0, psi(b)=0,
/// psi'(b)=0; the glued map is x + psi(x).
struct GlueCubic {
  double a = 0.0, b = 1.0;
  double d0 = 0.0, m0 = 0.0;

  double psi(double x) const {
    const double h = b - a;
    const double t = (x - a) / h;
    const double u = 1.0 - t;
    // Hermite: d0 * h00(t) + h*m0 * h10(t) with h00 = (1+2t)u^2, h10 = t u^2
    return u * u * (d0 * (1.0 + 2.0 * t) + h * m0 * t);
  }
  double dpsi(double x) const {
    const double h = b - a;
    const double t = (x - a) / h;
    return (d0 / h) * (6.0 * t * t - 6.0 * t) + m0 * (3.0 * t * t - 4.0 * t + 1.0);
  }
};

GlueCubic make_glue(double a, double b, double value_at_a, double deriv_at_a) {
  GlueCubic g;
  g.a = a;
  g.b = b;
  g.d0 = value_at_a - a;
  g.m0 = deriv_at_a - 1.0;
  // Fritsch-Carlson style tangent damping, then certify monotonicity and the
  // absence of fixed points strictly inside.
  const double secant = (b - value_at_a) / (b - a);
  if (deriv_at_a > 3.0 * secant) g.m0 = 3.0 * secant - 1.0;
  const int n = 4096;
  const bool below = g.d0 < 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = a + (b - a) * static_cast<double>(i) / n;
    if (!(1.0 + g.dpsi(x) > 0.0)) throw ConstructionError("glue not monotone");
    if (i > 0 && i < n) {
      const double p = g.psi(x);
      if (below ? !(p < 0.0) : !(p > 0.0))
        throw ConstructionError("glue has an interior fixed point");
    }
  }
  return g;
}

void require_theorem5_modulus(const Modulus& m) {
  if (!m.classify_regularity().alpha_monotone)
    throw ConstructionError(
        "sharpness: modulus fails the decreasing omega(x)/x^alpha hypothesis");
}

class SharpnessImpl final : public Diffeo::Impl {
 public:
  SharpnessImpl(const Modulus& m, double eps, std::size_t k_min)
      : frame_((require_theorem5_modulus(m), make_frame(m, eps, k_min, 0.5))) {
    const double a = frame_.a;
    b_ = std::min(1.0, 2.0 * a);
    glue_ = make_glue(a, b_, frame_.eval(a), frame_.deriv(a));
    id_regions = {{b_, 1.0}};
    prov.constructor = "sharpness";
    prov.params = {{"modulus", m.describe()},
                   {"eps", fmt(eps)},
                   {"k_min", fmt(static_cast<double>(k_min))},
                   {"a_eps", fmt(a)},
                   {"glue_end", fmt(b_)}};
  }

  double eval(double x) const override {
    if (x <= frame_.a) return frame_.eval(x);
    if (x < b_) return x + glue_.psi(x);
    return x;
  }
  double deriv(double x) const override {
    if (x <= frame_.a) return frame_.deriv(x);
    if (x < b_) return 1.0 + glue_.dpsi(x);
    return 1.0;
  }
  double displacement(double x) const override {
    if (x <= frame_.a) return frame_.displacement(x);
    if (x < b_) return glue_.psi(x);
    return 0.0;
  }

  const SharpFrame& frame() const { return frame_; }

 private:
  SharpFrame frame_;
  double b_ = 1.0;
  GlueCubic glue_;
};

class PasteImpl final : public Diffeo::Impl {
 public:
  PasteImpl(const Modulus& m, std::size_t k_min, std::vector<Diffeo::PastedBlock> blocks) {
    std::sort(blocks.begin(), blocks.end(),
              [](const auto& l, const auto& r) { return l.a < r.a; });
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const auto& blk = blocks[i];
      if (!(blk.a >= 0.0 && blk.a < blk.b && blk.b <= 1.0))
        throw SpecError("paste: block must satisfy 0 <= a < b <= 1");
      if (i > 0 && !(blocks[i - 1].b < blk.a))
        throw SpecError("paste: blocks must be pairwise disjoint with gaps");
    }
    if (!blocks.empty()) require_theorem5_modulus(m);
    double prev_end = 0.0;
    for (const auto& blk : blocks) {
      Piece p;
      p.a = blk.a;
      p.b = blk.b;
      // The frame must fit strictly inside the block, leaving room for the glue.
      p.frame = make_frame(m, blk.epsilon, k_min, 0.5 * (blk.b - blk.a));
      p.glue = make_glue(blk.a + p.frame.a, blk.b, blk.a + p.frame.eval(p.frame.a),
                         p.frame.deriv(p.frame.a));
      if (prev_end < blk.a) id_regions.emplace_back(prev_end, blk.a);
      prev_end = blk.b;
      fixed.push_back(blk.a);  // frame origin: f(a_k) = a_k with f'(a_k) = 1
      fixed.push_back(blk.b);
      pieces_.push_back(std::move(p));
    }
    if (prev_end < 1.0) id_regions.emplace_back(prev_end, 1.0);
    if (pieces_.empty()) id_regions = {{0.0, 1.0}};
    std::sort(fixed.begin(), fixed.end());
    fixed.erase(std::unique(fixed.begin(), fixed.end()), fixed.end());
    prov.constructor = "pasted";
    prov.params = {{"modulus", m.describe()}, {"blocks", fmt(static_cast<double>(pieces_.size()))}};
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      prov.params.emplace_back("a" + std::to_string(i), fmt(pieces_[i].a));
      prov.params.emplace_back("b" + std::to_string(i), fmt(pieces_[i].b));
      prov.params.emplace_back("a_eps" + std::to_string(i), fmt(pieces_[i].frame.a));
    }
  }

  double eval(double x) const override { return x + displacement(x); }
  double deriv(double x) const override {
    const Piece* p = find(x);
    if (!p) return 1.0;
    if (x <= p->a + p->frame.a) return p->frame.deriv(x - p->a);
    return 1.0 + p->glue.dpsi(x);
  }
  double displacement(double x) const override {
    const Piece* p = find(x);
    if (!p) return 0.0;
    if (x <= p->a + p->frame.a) return p->frame.displacement(x - p->a);
    return p->glue.psi(x);
  }

 private:
  struct Piece {
    double a, b;
    SharpFrame frame;
    GlueCubic glue;
  };
  const Piece* find(double x) const {
    for (const auto& p : pieces_)
      if (x > p.a && x < p.b) return &p;
    return nullptr;
  }
  std::vector<Piece> pieces_;
};

}  // namespace

Diffeo Diffeo::sharpness_family(const Modulus& m, double eps, std::size_t k_min) {
  return Diffeo(std::make_shared<SharpnessImpl>(m, eps, k_min));
}

Diffeo Diffeo::paste(const Modulus& m, std::size_t k_min,
                     const std::vector<PastedBlock>& blocks) {
  return Diffeo(std::make_shared<PasteImpl>(m, k_min, blocks));
}

// -- inverse and composition ---------------------------------------------------

namespace {

class InverseImpl final : public Diffeo::Impl {
 public:
  explicit InverseImpl(Diffeo base) : base_(std::move(base)) {
    prov.constructor = "inverse";
    prov.params = {{"of", base_.description()}};
    fixed = base_.fixed_points();
    id_regions = base_.identity_regions();
  }
  double eval(double y) const override { return base_.inverse_eval(y); }
  double deriv(double y) const override { return 1.0 / base_.deriv(base_.inverse_eval(y)); }

 private:
  Diffeo base_;
};

class ComposeImpl final : public Diffeo::Impl {
 public:
  ComposeImpl(Diffeo outer, Diffeo inner) : o_(std::move(outer)), i_(std::move(inner)) {
    prov.constructor = "compose";
    prov.params = {{"outer", o_.description()}, {"inner", i_.description()}};
    // Identity regions survive only where both factors are the identity.
    for (const auto& [lo1, hi1] : o_.identity_regions())
      for (const auto& [lo2, hi2] : i_.identity_regions()) {
        const double lo = std::max(lo1, lo2), hi = std::min(hi1, hi2);
        if (lo < hi) id_regions.emplace_back(lo, hi);
      }
  }
  double eval(double x) const override { return o_.eval(i_.eval(x)); }
  double deriv(double x) const override { return o_.deriv(i_.eval(x)) * i_.deriv(x); }

 private:
  Diffeo o_, i_;
};

}  // namespace

Diffeo Diffeo::inverse_map(const Diffeo& f) { return Diffeo(std::make_shared<InverseImpl>(f)); }
Diffeo Diffeo::compose(const Diffeo& outer, const Diffeo& inner) {
  return Diffeo(std::make_shared<ComposeImpl>(outer, inner));
}

double Diffeo::inverse_eval(double y) const {
  check_coord(y, "inverse_eval");
  if (y <= 0.0) return 0.0;
  if (y >= 1.0) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (impl_->eval(mid) < y)
      lo = mid;
    else
      hi = mid;
  }
  // Newton polish within the bracket where the derivative allows it.
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 8; ++it) {
    const double fx = impl_->eval(x);
    const double dx = impl_->deriv(x);
    if (fx < y)
      lo = std::max(lo, x);
    else
      hi = std::min(hi, x);
    if (!(dx > 1e-8)) break;
    double nx = x - (fx - y) / dx;
    if (!(nx > lo) || !(nx < hi)) nx = 0.5 * (lo + hi);
    if (nx == x) break;
    x = nx;
  }
  // Fall back to deep bisection if the residual is still loose.
  if (std::fabs(impl_->eval(x) - y) > 1e-13) {
    for (int it = 0; it < 160 && hi - lo > 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (impl_->eval(mid) < y)
        lo = mid;
      else
        hi = mid;
    }
    x = 0.5 * (lo + hi);
  }
  return x;
}

// -- derivative modulus sweeps --------------------------------------------------

std::vector<std::pair<double, double>> estimate_derivative_modulus(
    const Diffeo& f, const std::vector<double>& delta_grid, std::size_t x_grid_size,
    double x_lo, double x_hi) {
  if (delta_grid.empty() || x_grid_size < 2) throw DomainError("empty sweep grids");
  if (!(x_lo >= 0.0 && x_lo < x_hi && x_hi <= 1.0)) throw DomainError("bad sweep window");
  const double span = x_hi - x_lo;
  std::vector<double> xs;
  xs.reserve(x_grid_size + 2);
  const std::size_t uniform = x_grid_size / 2;
  for (std::size_t i = 0; i <= uniform; ++i)
    xs.push_back(x_lo + span * static_cast<double>(i) / static_cast<double>(uniform));
  const std::size_t logn = x_grid_size / 4;
  for (const double t : log_grid(span * 1e-9, span * 0.5, logn)) {
    xs.push_back(x_lo + t);
    xs.push_back(x_hi - t);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<double> ds(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) ds[i] = f.deriv(xs[i]);

  std::vector<std::pair<double, double>> out;
  out.reserve(delta_grid.size());
  for (const double delta : delta_grid)
    out.emplace_back(delta, omega_hat_sweep(xs, ds, delta));
  return out;
}

double membership_constant(const Diffeo& f, const Modulus& m,
                           const std::vector<double>& delta_grid, std::size_t x_grid_size,
                           double x_lo, double x_hi) {
  const auto hat = estimate_derivative_modulus(f, delta_grid, x_grid_size, x_lo, x_hi);
  double best = 0.0;
  for (const auto& [delta, oh] : hat) {
    const double w = m.eval(std::min(delta, m.domain_end()));
    if (w <= 0.0) {
      if (oh > 0.0) return std::numeric_limits<double>::infinity();
      continue;
    }
    best = std::max(best, oh / w);
  }
  return best;
}

}  // namespace growthlab
