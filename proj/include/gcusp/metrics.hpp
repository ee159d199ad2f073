#pragma once

#include <random>
#include <vector>

#include "gcusp/groups.hpp"

namespace gcusp {

inline void require_interior(const WeylVector& psi, const Vec& p) {
  const DomainShape s = make_domain(psi);
  require_dim(p.size(), s.n, "point");
  if (!in_chart(s, p) || !(detail::horo_value(psi, s, p) < 0.0))
    fail(ErrorCode::NotInterior, "point is not interior");
}

// Cross-ratio distance along the chord through p and q.
inline double hilbert_distance(const WeylVector& psi, const Vec& p, const Vec& q) {
  require_interior(psi, p);
  require_interior(psi, q);
  if (p == q) return 0.0;
  const ChordEnds e = chord_endpoints(psi, p, q - p);
  // q sits at parameter 1, so t_plus > 1
  const double a = std::isinf(e.t_minus) ? 0.0 : std::log1p(1.0 / e.t_minus);
  const double b = std::isinf(e.t_plus) ? 0.0 : std::log1p(1.0 / std::max(e.t_plus - 1.0, 0.0));
  return 0.5 * (a + b);
}

// Finsler norm 1/2 (1/t_- + 1/t_+) |v|, endpoints measured in units of v.
inline double hilbert_norm(const WeylVector& psi, const Vec& p, const Vec& v) {
  require_interior(psi, p);
  const ChordEnds e = chord_endpoints(psi, p, v);
  return 0.5 * ((std::isinf(e.t_minus) ? 0.0 : 1.0 / e.t_minus) +
                (std::isinf(e.t_plus) ? 0.0 : 1.0 / e.t_plus));
}

// Direction with Dh(v) = 1 generating the flow.
inline Vec flow_direction(const WeylVector& psi, const Vec& p) {
  const DomainShape s = make_domain(psi);
  if (s.full()) return -p;
  return -Vec::Unit(s.n, s.t);
}

struct MetricSample {
  Vec point;
  Mat beta_gram;
  double h_value = 0.0;
  Vec grad_h;
};

// beta^c = c D^2h(a) + c^2 Dh(w)^2 with w = a + Dh(w) v_flow.
class BetaMetric {
 public:
  explicit BetaMetric(WeylVector psi, double c = 1.0) : psi_(std::move(psi)), c_(c) {
    if (!(c > 0.0)) fail(ErrorCode::NonPositiveScale, "scale must be positive");
  }

  MetricSample at(const Vec& p) const {
    const DomainShape s = make_domain(psi_);
    require_chart(s, p);
    const HoroEval ev = horofunction(psi_, p, 2);
    const Vec& g = *ev.gradient;
    const Vec vf = flow_direction(psi_, p);
    const Mat proj = Mat::Identity(s.n, s.n) - vf * g.transpose();
    Mat gram = c_ * proj.transpose() * *ev.hessian * proj + c_ * c_ * g * g.transpose();
    gram = 0.5 * (gram + gram.transpose()).eval();
    return {p, gram, ev.value, g};
  }

  BetaMetric horoscale(double c) const {
    if (!(c > 0.0)) fail(ErrorCode::NonPositiveScale, "scale must be positive");
    return BetaMetric(psi_, c_ * c);
  }

  double scale() const { return c_; }
  const WeylVector& psi() const { return psi_; }

 private:
  WeylVector psi_;
  double c_;
};

inline MetricSample beta_form(const WeylVector& psi, const Vec& p) { return BetaMetric(psi).at(p); }

inline BetaMetric horoscale(const WeylVector& psi, double c) { return BetaMetric(psi, c); }

struct ChartCoords {
  Vec X;  // r
  Vec Y;  // u
  double s = 0.0;
};

// chart(X, Y, s) = Phi_{-s}(m*(X, Y) b), so h = -s on the image. The pullback
// of beta is constant; its horosphere block factors as L L^T.
class EuclideanChart {
 public:
  explicit EuclideanChart(WeylVector psi) : psi_(std::move(psi)), shape_(make_domain(psi_)) {
    const int n = shape_.n;
    const ChartCoords o{Vec::Zero(shape_.r), Vec::Zero(shape_.u), 0.0};
    const Mat J = jacobian(o);
    gram_ = J.transpose() * beta_form(psi_, point(o)).beta_gram * J;
    gram_ = 0.5 * (gram_ + gram_.transpose()).eval();
    horo_gram_ = gram_.topLeftCorner(n - 1, n - 1);
    Eigen::LLT<Mat> llt(horo_gram_);
    L_ = llt.matrixL();
    Lt_inv_ = L_.transpose().inverse();
  }

  const WeylVector& psi() const { return psi_; }
  const DomainShape& shape() const { return shape_; }
  const Mat& gram() const { return gram_; }
  const Mat& horo_gram() const { return horo_gram_; }
  const Mat& cholesky() const { return L_; }

  Vec xi(const ChartCoords& c) const {
    Vec v(shape_.n - 1);
    v.head(shape_.r) = c.X;
    v.tail(shape_.u) = c.Y;
    return v;
  }

  Vec point(const ChartCoords& c) const {
    require_dim(c.X.size(), shape_.r, "chart X");
    require_dim(c.Y.size(), shape_.u, "chart Y");
    const int n = shape_.n;
    Vec p(n);
    if (shape_.full()) {
      const Vec X = full_X(psi_, shape_, c.X);
      for (int i = 0; i < n; ++i) p(i) = std::exp(c.s + X(i));
      return p;
    }
    double psiX = 0.0;
    for (int i = 0; i < shape_.t; ++i) {
      p(i) = std::exp(c.X(i));
      psiX += psi_[i] * c.X(i);
    }
    p(shape_.t) = 0.5 * c.Y.squaredNorm() - psiX + c.s;
    p.tail(shape_.u) = c.Y;
    return p;
  }

  // Columns: d/dX_i, d/dY_j, d/ds.
  Mat jacobian(const ChartCoords& c) const {
    const int n = shape_.n;
    const Vec p = point(c);
    Mat J = Mat::Zero(n, n);
    if (shape_.full()) {
      const double pn = psi_[n - 1];
      for (int i = 0; i < shape_.r; ++i) {
        J(i, i) = p(i);
        J(n - 1, i) = -psi_[i] / pn * p(n - 1);
      }
      J.col(n - 1) = p;
      return J;
    }
    const int z = shape_.t;
    for (int i = 0; i < shape_.t; ++i) {
      J(i, i) = p(i);
      J(z, i) = -psi_[i];
    }
    for (int j = 0; j < shape_.u; ++j) {
      J(z, shape_.r + j) = c.Y(j);
      J(z + 1 + j, shape_.r + j) = 1.0;
    }
    J(z, n - 1) = 1.0;
    return J;
  }

  ChartCoords coords_of(const Vec& p) const {
    require_chart(shape_, p);
    if (shape_.full())
      for (int i = 0; i < shape_.n; ++i)
        if (!(p(i) > 0.0)) fail(ErrorCode::OutsideChart, "point outside V_psi");
    const double s = -detail::horo_value(psi_, shape_, p);
    ChartCoords c{Vec(shape_.r), Vec(shape_.u), s};
    if (shape_.full()) {
      for (int i = 0; i < shape_.r; ++i) c.X(i) = std::log(p(i)) - s;
      return c;
    }
    for (int i = 0; i < shape_.t; ++i) c.X(i) = std::log(p(i));
    c.Y = p.tail(shape_.u);
    return c;
  }

  // Isometry onto Euclidean space; the last coordinate equals h.
  Vec to_euclidean(const ChartCoords& c) const {
    Vec e(shape_.n);
    e.head(shape_.n - 1) = L_.transpose() * xi(c);
    e(shape_.n - 1) = -c.s;
    return e;
  }

  Vec euclid_translation(const Vec& xi_) const { return L_.transpose() * xi_; }
  Vec xi_from_euclid(const Vec& w) const { return Lt_inv_ * w; }
  Mat euclid_linear(const Mat& rho) const { return L_.transpose() * rho * Lt_inv_; }
  Mat xi_linear(const Mat& R) const { return Lt_inv_ * R * L_.transpose(); }

 private:
  WeylVector psi_;
  DomainShape shape_;
  Mat gram_, horo_gram_, L_, Lt_inv_;
};

inline EuclideanChart euclidean_chart(const WeylVector& psi) { return EuclideanChart(psi); }

// Linear action of o on chart parameters: o m*(xi) o^{-1} = m*(rho xi).
inline Mat rho_matrix(const WeylVector& psi, const OrthDescriptor& o) {
  const int k = psi.n() - 1;
  const Mat om = orth_matrix(psi, o);
  const Mat oinv = om.inverse();
  Mat rho(k, k);
  for (int j = 0; j < k; ++j) {
    const Mat conj = om * translation_matrix(psi, params_from_xi(psi, Vec::Unit(k, j))) * oinv;
    const Decomposition d = semidirect_decompose(psi, conj);
    rho.col(j) = chart_xi(psi, d.params);
  }
  return rho;
}

struct SecondFundamentalForm {
  Mat tangent_basis;  // n x (n-1), columns e_u + f_u e_z
  Mat second_form;    // II in that basis
  double lambda = 0.0;
  Mat beta_restricted;
};

namespace detail {

struct GraphJet {
  Vec grad;  // df/du
  Mat hess;  // d2f/du2
};

// Derivatives of the boundary graph z = f(u), u = (x, y).
inline GraphJet graph_jet(const WeylVector& psi, const DomainShape& s, const Vec& q) {
  const int k = s.n - 1;
  GraphJet j{Vec::Zero(k), Mat::Zero(k, k)};
  if (s.full()) {
    const double f = q(s.n - 1);
    const double pn = psi[s.n - 1];
    for (int i = 0; i < k; ++i) {
      const double ai = psi[i] / pn;
      j.grad(i) = -ai * f / q(i);
      for (int m = 0; m < k; ++m) {
        const double am = psi[m] / pn;
        j.hess(i, m) = f * (ai * am + (i == m ? ai : 0.0)) / (q(i) * q(m));
      }
    }
    return j;
  }
  for (int i = 0; i < s.t; ++i) {
    j.grad(i) = -psi[i] / q(i);
    j.hess(i, i) = psi[i] / (q(i) * q(i));
  }
  for (int m = 0; m < s.u; ++m) {
    j.grad(s.r + m) = q(s.t + 1 + m);
    j.hess(s.r + m, s.r + m) = 1.0;
  }
  return j;
}

// Graph coordinates u of a point: drop z.
inline Vec graph_u(const DomainShape& s, const Vec& v) {
  Vec u(s.n - 1);
  u.head(s.r) = v.head(s.r);
  u.tail(s.u) = v.tail(s.u);
  return u;
}

}  // namespace detail

inline void require_boundary(const WeylVector& psi, const Vec& q, double tol = 1e-9) {
  const DomainShape s = make_domain(psi);
  require_dim(q.size(), s.n, "point");
  if (!in_chart(s, q) || (s.full() && !(q(s.n - 1) > 0.0)))
    fail(ErrorCode::NotOnBoundary, "point outside V_psi");
  if (std::abs(detail::horo_value(psi, s, q)) > tol) fail(ErrorCode::NotOnBoundary, "|h(q)| exceeds tolerance");
}

// II on tangent vectors given in ambient coordinates; only their graph
// components enter, with inward normal (-grad f, 1)/sqrt(1 + |grad f|^2).
inline double second_form_value(const WeylVector& psi, const Vec& q, const Vec& v, const Vec& w) {
  const DomainShape s = make_domain(psi);
  const auto j = detail::graph_jet(psi, s, q);
  const Vec a = detail::graph_u(s, v), b = detail::graph_u(s, w);
  return a.dot(j.hess * b) / std::sqrt(1.0 + j.grad.squaredNorm());
}

inline SecondFundamentalForm second_fundamental_form(const WeylVector& psi, const Vec& q) {
  require_boundary(psi, q);
  const DomainShape s = make_domain(psi);
  const int k = s.n - 1;
  const auto j = detail::graph_jet(psi, s, q);
  Mat T = Mat::Zero(s.n, k);
  for (int c = 0; c < k; ++c) {
    const int amb = c < s.r ? c : c + 1;
    T(amb, c) = 1.0;
    T(s.z_index(), c) = j.grad(c);
  }
  SecondFundamentalForm out;
  out.tangent_basis = T;
  out.second_form = j.hess / std::sqrt(1.0 + j.grad.squaredNorm());
  out.lambda = horofunction(psi, q, 1).gradient->norm();
  out.beta_restricted = T.transpose() * beta_form(psi, q).beta_gram * T;
  return out;
}

struct Displacement {
  double beta_displacement = 0.0;
  double hilbert_estimate = 0.0;
  double deepest_level = 0.0;
};

// Euclidean form w -> R w + v of an element of G(psi) on a horosphere.
struct EuclideanIsometry {
  Mat R;
  Vec v;
};

inline EuclideanIsometry euclidean_form(const EuclideanChart& ch, const Decomposition& d) {
  return {ch.euclid_linear(rho_matrix(ch.psi(), d.orth)), ch.euclid_translation(chart_xi(ch.psi(), d.params))};
}

inline Displacement displacement(const WeylVector& psi, const Mat& g, std::uint64_t seed = 1,
                                 int levels = 10) {
  const Decomposition d = semidirect_decompose(psi, g);
  if (std::abs(d.s) > 1e-9) fail(ErrorCode::NotInGroup, "element moves horospheres");
  const EuclideanChart ch(psi);
  const auto [R, v] = euclidean_form(ch, d);
  const int k = psi.n() - 1;
  const Mat A = R - Mat::Identity(k, k);
  Displacement out;
  Vec w0 = Vec::Zero(k);
  if (k > 0) {
    Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    // component of v in ker(R - I) = orthogonal complement of range(R - I)
    Vec vfix = v;
    const auto& sv = svd.singularValues();
    for (int i = 0; i < k; ++i)
      if (sv(i) > 1e-10) vfix -= svd.matrixU().col(i) * svd.matrixU().col(i).dot(v);
    out.beta_displacement = vfix.norm();
    w0 = svd.solve(-(v - vfix));
  }
  const Vec xi0 = ch.xi_from_euclid(w0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 0.1);
  double best = kInf;
  // depth in flow parameter; for t = n distances grow linearly in it
  const bool full = make_domain(psi).full();
  for (int lvl = 0; lvl < levels; ++lvl) {
    const double depth = full ? 1.0 + 3.0 * lvl : std::pow(4.0, lvl);
    for (int rep = 0; rep < 3; ++rep) {
      Vec xi = xi0;
      if (rep > 0)
        for (int i = 0; i < k; ++i) xi(i) += nd(rng);
      const TranslationParams tp = params_from_xi(psi, xi);
      const Vec p = ch.point({tp.X, tp.Y, depth});
      const Vec gp = act_affine(g, p);
      best = std::min(best, hilbert_distance(psi, p, gp));
    }
    out.deepest_level = depth;
  }
  out.hilbert_estimate = best;
  return out;
}

// c = (sup over J(psi) of the beta displacement)^{-2}.
inline double normalized_scale(const WeylVector& psi) {
  const DomainShape s = make_domain(psi);
  if (s.t == 0) fail(ErrorCode::ZeroPsi, "psi = 0 has no normalization");
  if (!s.full() && s.r > 1) fail(ErrorCode::UnsupportedPsi, "J(psi) is unbounded for t < n and r > 1");
  const EuclideanChart ch(psi);
  const int k = s.n - 1;
  double sup2 = 0.0;
  if (!s.full()) {
    Vec xi = Vec::Zero(k);
    xi(0) = 1.0;
    sup2 = xi.dot(ch.horo_gram() * xi);
  } else {
    // vertices of {X in ker psi : max X_i = 1}: all ones except one coordinate
    const double S = psi.sum();
    for (int j = 0; j < s.n; ++j) {
      Vec X = Vec::Ones(s.n);
      X(j) = -(S - psi[j]) / psi[j];
      const Vec xi = X.head(k);
      sup2 = std::max(sup2, xi.dot(ch.horo_gram() * xi));
    }
  }
  return 1.0 / sup2;
}

struct ShrinkProfile {
  std::vector<double> t, f, d;
  double slope = 0.0;  // least squares slope of log f against d
  bool parabolic = false;
};

inline ShrinkProfile shrink_profile(const WeylVector& psi, const Vec& p, const Vec& q,
                                    const std::vector<double>& t_grid) {
  require_boundary(psi, p);
  require_boundary(psi, q);
  const DomainShape s = make_domain(psi);
  if (p == q) fail(ErrorCode::InvalidArgument, "p and q must differ");
  ShrinkProfile out;
  out.parabolic = !s.full();
  for (int i = 0; i < s.t && out.parabolic; ++i)
    if (std::abs(p(i) - q(i)) > 1e-12 * std::max(1.0, std::abs(p(i)))) out.parabolic = false;
  const Vec p1 = act_affine(radial_flow_matrix(psi, -1.0), p);
  for (double t : t_grid) {
    const Mat F = radial_flow_matrix(psi, -t);
    const Vec pt = act_affine(F, p), qt = act_affine(F, q);
    out.t.push_back(t);
    out.f.push_back(hilbert_distance(psi, pt, qt));
    out.d.push_back(hilbert_distance(psi, p1, pt));
  }
  const std::size_t m = out.t.size();
  if (m >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double x = out.d[i], y = std::log(out.f[i]);
      sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    const double den = m * sxx - sx * sx;
    out.slope = den != 0.0 ? (m * sxy - sx * sy) / den : 0.0;
  }
  return out;
}

}  // namespace gcusp
