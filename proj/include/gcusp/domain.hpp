#pragma once

#include <initializer_list>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "gcusp/projective.hpp"

namespace gcusp {

struct Rational {
  long long num = 0;
  long long den = 1;
  double value() const { return double(num) / double(den); }
  friend bool operator==(const Rational& a, const Rational& b) {
    return (__int128)a.num * b.den == (__int128)b.num * a.den;
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return (__int128)a.num * b.den < (__int128)b.num * a.den;
  }
};

inline Rational make_rational(long long p, long long q) {
  if (q == 0) fail(ErrorCode::ParseError, "zero denominator");
  if (q < 0) p = -p, q = -q;
  const long long g = std::gcd(p < 0 ? -p : p, q);
  return {p / (g ? g : 1), q / (g ? g : 1)};
}

// psi_1 >= ... >= psi_n >= 0. When built from rationals, ties and zeros are
// decided exactly; otherwise with settings().weyl_zero.
class WeylVector {
 public:
  explicit WeylVector(std::vector<double> c) : c_(std::move(c)) { validate(); }
  WeylVector(std::initializer_list<double> c) : c_(c) { validate(); }
  explicit WeylVector(const Vec& c) : c_(c.data(), c.data() + c.size()) { validate(); }
  explicit WeylVector(std::vector<Rational> q) : exact_(std::move(q)) {
    for (const auto& r : *exact_) c_.push_back(r.value());
    validate();
  }
  static WeylVector zero(int n) { return WeylVector(std::vector<double>(n, 0.0)); }

  int n() const { return int(c_.size()); }
  double operator[](int i) const { return c_[i]; }
  const std::vector<double>& coeffs() const { return c_; }
  Vec vec() const { return Eigen::Map<const Vec>(c_.data(), c_.size()); }
  bool exact() const { return exact_.has_value(); }
  const std::optional<std::vector<Rational>>& rationals() const { return exact_; }

  bool is_zero(int i) const {
    if (exact_) return (*exact_)[i].num == 0;
    return std::abs(c_[i]) <= settings().weyl_zero;
  }
  bool equal(int i, int j) const {
    if (exact_) return (*exact_)[i] == (*exact_)[j];
    return std::abs(c_[i] - c_[j]) <= settings().weyl_zero;
  }
  double sum() const { return std::accumulate(c_.begin(), c_.end(), 0.0); }

  WeylVector scaled(double c) const {
    std::vector<double> v(c_);
    for (auto& x : v) x *= c;
    return WeylVector(std::move(v));
  }

 private:
  void validate() const {
    if (c_.size() < 2) fail(ErrorCode::InvalidArgument, "n must be >= 2");
    for (double x : c_)
      if (!std::isfinite(x)) fail(ErrorCode::InvalidArgument, "non-finite coefficient");
    for (std::size_t i = 0; i + 1 < c_.size(); ++i) {
      const bool bad = exact_ ? ((*exact_)[i] < (*exact_)[i + 1]) : (c_[i] < c_[i + 1]);
      if (bad) fail(ErrorCode::UnsortedWeyl, "coefficients must be non-increasing");
    }
    const bool neg = exact_ ? exact_->back().num < 0 : c_.back() < 0.0;
    if (neg) fail(ErrorCode::NegativeWeyl, "coefficients must be >= 0");
  }

  std::vector<double> c_;
  std::optional<std::vector<Rational>> exact_;
};

// Coordinates of V_psi are (x, z, y): x = [0, r), z = r, y = [r+1, n).
struct DomainShape {
  int n = 0, t = 0, r = 0, u = 0;
  bool full() const { return t == n; }
  int z_index() const { return r; }
  int y_begin() const { return r + 1; }
  // Number of coordinates that must be strictly positive in V_psi.
  int positive_count() const { return t; }
};

inline DomainShape make_domain(const WeylVector& psi) {
  DomainShape s;
  s.n = psi.n();
  int t = 0;
  for (int i = 0; i < s.n; ++i)
    if (!psi.is_zero(i)) ++t;
  s.t = t;
  s.r = std::min(t, s.n - 1);
  s.u = std::max(s.n - t - 1, 0);
  return s;
}

enum class Membership { Interior, Boundary, Exterior, OutsideChart };

inline const char* to_string(Membership m) {
  switch (m) {
    case Membership::Interior: return "Interior";
    case Membership::Boundary: return "Boundary";
    case Membership::Exterior: return "Exterior";
    case Membership::OutsideChart: return "OutsideChart";
  }
  return "?";
}

struct HoroEval {
  double value = 0.0;
  std::optional<Vec> gradient;
  std::optional<Mat> hessian;
};

inline bool in_chart(const DomainShape& s, const Vec& p) {
  if (p.size() != s.n) return false;
  for (int i = 0; i < s.t; ++i)
    if (!(p(i) > 0.0)) return false;
  return p.allFinite();
}

inline void require_chart(const DomainShape& s, const Vec& p) {
  require_dim(p.size(), s.n, "point");
  if (!in_chart(s, p)) fail(ErrorCode::OutsideChart, "point outside V_psi");
}

namespace detail {

// Value only, no validation; +inf outside the chart.
inline double horo_value(const WeylVector& psi, const DomainShape& s, const Vec& p) {
  double acc = 0.0;
  for (int i = 0; i < s.t; ++i) {
    if (!(p(i) > 0.0)) return kInf;
    acc -= psi[i] * std::log(p(i));
  }
  if (s.full()) return acc / psi.sum();
  acc -= p(s.t);
  for (int i = s.t + 1; i < s.n; ++i) acc += 0.5 * p(i) * p(i);
  return acc;
}

inline double horo_slope(const WeylVector& psi, const DomainShape& s, const Vec& p, const Vec& v) {
  double d = 0.0;
  for (int i = 0; i < s.t; ++i) d -= psi[i] * v(i) / p(i);
  if (s.full()) return d / psi.sum();
  d -= v(s.t);
  for (int i = s.t + 1; i < s.n; ++i) d += p(i) * v(i);
  return d;
}

}  // namespace detail

inline HoroEval horofunction(const WeylVector& psi, const Vec& p, int order = 0) {
  const DomainShape s = make_domain(psi);
  require_chart(s, p);
  HoroEval out;
  out.value = detail::horo_value(psi, s, p);
  if (order >= 1) {
    Vec g = Vec::Zero(s.n);
    const double k = s.full() ? 1.0 / psi.sum() : 1.0;
    for (int i = 0; i < s.t; ++i) g(i) = -k * psi[i] / p(i);
    if (!s.full()) {
      g(s.t) = -1.0;
      for (int i = s.t + 1; i < s.n; ++i) g(i) = p(i);
    }
    out.gradient = g;
  }
  if (order >= 2) {
    Mat hm = Mat::Zero(s.n, s.n);
    const double k = s.full() ? 1.0 / psi.sum() : 1.0;
    for (int i = 0; i < s.t; ++i) hm(i, i) = k * psi[i] / (p(i) * p(i));
    if (!s.full())
      for (int i = s.t + 1; i < s.n; ++i) hm(i, i) = 1.0;
    out.hessian = hm;
  }
  return out;
}

inline double horo(const WeylVector& psi, const Vec& p) { return horofunction(psi, p, 0).value; }

// f with Omega = {z >= f(x, y)}. x has length r, y has length u.
inline double boundary_height(const WeylVector& psi, const Vec& x, const Vec& y) {
  const DomainShape s = make_domain(psi);
  require_dim(x.size(), s.r, "boundary_height x");
  require_dim(y.size(), s.u, "boundary_height y");
  for (int i = 0; i < s.r; ++i)
    if (!(x(i) > 0.0)) fail(ErrorCode::OutsideChart, "x must be positive");
  if (s.full()) {
    double lf = 0.0;
    const double pn = psi[s.n - 1];
    for (int i = 0; i < s.r; ++i) lf -= psi[i] / pn * std::log(x(i));
    return std::exp(lf);
  }
  double f = 0.0;
  for (int i = 0; i < s.t; ++i) f -= psi[i] * std::log(x(i));
  return f + 0.5 * y.squaredNorm();
}

// F(x, y) = (x, f(x, y), y).
inline Vec boundary_point(const WeylVector& psi, const Vec& x, const Vec& y) {
  const DomainShape s = make_domain(psi);
  const double f = boundary_height(psi, x, y);
  Vec p(s.n);
  p.head(s.r) = x;
  p(s.z_index()) = f;
  p.tail(s.u) = y;
  return p;
}

inline Membership membership(const WeylVector& psi, const Vec& p) {
  const DomainShape s = make_domain(psi);
  if (!in_chart(s, p)) return Membership::OutsideChart;
  const double h = detail::horo_value(psi, s, p);
  const double tol = settings().equality;
  if (std::abs(h) <= tol) return Membership::Boundary;
  return h < 0 ? Membership::Interior : Membership::Exterior;
}

inline Vec basepoint(const WeylVector& psi) {
  const DomainShape s = make_domain(psi);
  Vec b = Vec::Zero(s.n);
  b.head(s.t).setOnes();
  return b;
}

struct IdealBoundaryDescriptor {
  std::vector<ProjPoint> vertices;  // [e_1], ..., [e_{r+1}]
  int dimension = 0;
  ProjPoint center;                 // flow center [e_{t+1}], separate from the simplex
};

inline IdealBoundaryDescriptor ideal_boundary(const WeylVector& psi) {
  const DomainShape s = make_domain(psi);
  std::vector<ProjPoint> verts;
  for (int i = 0; i <= s.r; ++i) verts.emplace_back(Vec(Vec::Unit(s.n + 1, i)));
  return {std::move(verts), s.r, ProjPoint(Vec(Vec::Unit(s.n + 1, s.t)))};
}

struct ChordEnds {
  double t_minus = kInf;
  double t_plus = kInf;
};

namespace detail {

// First s > 0 with h(p + s v) = 0, or +inf. g(s) = h(p + s v) is convex with
// g(0) < 0, so it crosses zero at most once for s > 0.
inline double chord_forward(const WeylVector& psi, const DomainShape& s, const Vec& p, const Vec& v) {
  double wall = kInf;
  for (int i = 0; i < s.t; ++i)
    if (v(i) < 0.0) wall = std::min(wall, -p(i) / v(i));

  auto g = [&](double a) {
    if (a >= wall) return kInf;
    return horo_value(psi, s, p + a * v);
  };

  constexpr double kCap = 1152921504606846976.0;  // 2^60
  double lo = 0.0, hi = 1.0;
  double glo = g(0.0);
  double ghi = g(hi);
  while (ghi < 0.0) {
    if (hi >= wall) break;
    if (hi >= kCap) {
      const double gprev = g(hi * 0.5);
      if (ghi <= gprev) return kInf;  // non-increasing and negative at the cap
      if (hi >= 1e300) return kInf;
    }
    lo = hi;
    glo = ghi;
    hi = std::min(2.0 * hi, wall);
    ghi = g(hi);
  }
  (void)glo;
  if (ghi < 0.0) return kInf;

  // Safeguarded Newton from the right end; bisection when Newton leaves the bracket.
  double x = hi;
  for (int it = 0; it < 200; ++it) {
    const double gx = g(x);
    if (gx == 0.0) return x;
    if (gx < 0.0) lo = x;
    else hi = x;
    double next = 0.5 * (lo + hi);
    if (std::isfinite(gx)) {
      const Vec q = p + x * v;
      const double d = horo_slope(psi, s, q, v);
      if (d > 0.0) {
        const double nx = x - gx / d;
        if (nx > lo && nx < hi) {
          next = nx;
          if (std::abs(nx - x) <= 2.0 * std::numeric_limits<double>::epsilon() * x) return nx;
        }
      }
    }
    if (next == x || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      x = next;
      break;
    }
    x = next;
  }
  if (x > wall) x = wall;
  return x;
}

}  // namespace detail

inline ChordEnds chord_endpoints(const WeylVector& psi, const Vec& p, const Vec& v) {
  const DomainShape s = make_domain(psi);
  require_chart(s, p);
  require_dim(v.size(), s.n, "direction");
  if (!v.allFinite() || !(v.cwiseAbs().maxCoeff() > 0.0))
    fail(ErrorCode::DegenerateDirection, "direction is zero");
  if (!(detail::horo_value(psi, s, p) < 0.0)) fail(ErrorCode::NotInterior, "h(p) must be < 0");
  return {detail::chord_forward(psi, s, p, -v), detail::chord_forward(psi, s, p, v)};
}

}  // namespace gcusp
