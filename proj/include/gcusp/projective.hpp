#pragma once

#include <unsupported/Eigen/MatrixFunctions>

#include "gcusp/core.hpp"

namespace gcusp {

// A point of RP^n. Stored canonically: last coordinate 1 when it is nonzero,
// otherwise unit norm with the first nonzero entry positive.
class ProjPoint {
 public:
  explicit ProjPoint(Vec coords) : c_(std::move(coords)) { canonicalize(); }

  static ProjPoint from_affine(const Vec& a) {
    Vec h(a.size() + 1);
    h.head(a.size()) = a;
    h(a.size()) = 1.0;
    return ProjPoint(std::move(h));
  }

  const Vec& coords() const { return c_; }
  Eigen::Index dim() const { return c_.size() - 1; }

  // Relative size below which the last coordinate counts as zero.
  static constexpr double kInfinityTol = 1e-15;

  bool at_infinity() const { return c_(c_.size() - 1) == 0.0; }

 private:
  void canonicalize() {
    if (c_.size() < 2) fail(ErrorCode::InvalidArgument, "ProjPoint needs length >= 2");
    if (!c_.allFinite()) fail(ErrorCode::InvalidArgument, "ProjPoint has non-finite entry");
    const double nrm = c_.norm();
    if (nrm == 0.0) fail(ErrorCode::InvalidArgument, "ProjPoint is the zero vector");
    const Eigen::Index k = c_.size() - 1;
    if (std::abs(c_(k)) > kInfinityTol * c_.cwiseAbs().maxCoeff()) {
      c_ /= c_(k);
      c_(k) = 1.0;
      return;
    }
    c_(k) = 0.0;
    c_ /= c_.norm();
    for (Eigen::Index i = 0; i < k; ++i) {
      if (c_(i) != 0.0) {
        if (c_(i) < 0) c_ = -c_;
        break;
      }
    }
  }

  Vec c_;
};

class ProjMap {
 public:
  explicit ProjMap(Mat m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() < 2)
      fail(ErrorCode::DimensionMismatch, "ProjMap must be square of size >= 2");
    if (!m_.allFinite()) fail(ErrorCode::InvalidArgument, "ProjMap has non-finite entry");
    const double scale = m_.cwiseAbs().maxCoeff();
    const double det = m_.fullPivLu().determinant();
    if (scale == 0.0 ||
        std::abs(det) <= settings().invertibility * std::pow(scale, double(m_.rows())))
      fail(ErrorCode::Singular, "ProjMap is not invertible");
  }

  const Mat& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows() - 1; }

  ProjMap operator*(const ProjMap& o) const { return ProjMap(m_ * o.m_); }
  ProjMap inverse() const { return ProjMap(m_.inverse()); }

 private:
  Mat m_;
};

inline ProjPoint apply_map(const ProjMap& m, const ProjPoint& p) {
  require_dim(p.coords().size(), m.matrix().rows(), "apply_map");
  Vec img = m.matrix() * p.coords();
  const double ref = m.matrix().norm() * p.coords().norm();
  if (!(img.norm() > 1e-14 * ref)) fail(ErrorCode::ZeroImage, "image vanishes");
  return ProjPoint(std::move(img));
}

inline Vec to_affine(const ProjPoint& p) {
  if (p.at_infinity()) fail(ErrorCode::AtInfinity, "point lies on the hyperplane at infinity");
  return p.coords().head(p.dim());
}

// Affine action of an (n+1)x(n+1) matrix on R^n.
inline Vec act_affine(const Mat& m, const Vec& a) {
  require_dim(a.size() + 1, m.rows(), "act_affine");
  Vec h = m.leftCols(a.size()) * a + m.col(a.size());
  const double w = h(a.size());
  if (w == 0.0) fail(ErrorCode::AtInfinity, "affine image at infinity");
  return h.head(a.size()) / w;
}

namespace detail {

inline bool is_upper_triangular(const Mat& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = j + 1; i < m.rows(); ++i)
      if (m(i, j) != 0.0) return false;
  return true;
}

inline bool constant_diagonal(const Mat& m) {
  for (Eigen::Index i = 1; i < m.rows(); ++i)
    if (m(i, i) != m(0, 0)) return false;
  return true;
}

}  // namespace detail

// Matrix exponential. A triangular input with constant diagonal d is
// e^d times a terminating series in its nilpotent part, so it is exact.
inline Mat tri_exp(const Mat& a) {
  if (a.rows() != a.cols()) fail(ErrorCode::DimensionMismatch, "tri_exp needs a square matrix");
  if (detail::is_upper_triangular(a) && detail::constant_diagonal(a)) {
    const Eigen::Index n = a.rows();
    const double d = a(0, 0);
    Mat nil = a - d * Mat::Identity(n, n);
    Mat term = Mat::Identity(n, n), sum = Mat::Identity(n, n);
    for (Eigen::Index k = 1; k < n; ++k) {
      term = term * nil / double(k);
      sum += term;
    }
    return std::exp(d) * sum;
  }
  return a.exp();
}

// Principal logarithm of a matrix with positive real spectrum.
inline Mat tri_log(const Mat& m) {
  if (m.rows() != m.cols()) fail(ErrorCode::DimensionMismatch, "tri_log needs a square matrix");
  const Eigen::Index n = m.rows();
  if (detail::is_upper_triangular(m)) {
    for (Eigen::Index i = 0; i < n; ++i)
      if (!(m(i, i) > 0.0)) fail(ErrorCode::NonPositiveDiagonal, "diagonal entry <= 0");
    if (detail::constant_diagonal(m)) {
      const double d = m(0, 0);
      Mat nil = m / d - Mat::Identity(n, n);
      Mat term = Mat::Identity(n, n), sum = Mat::Zero(n, n);
      for (Eigen::Index k = 1; k < n; ++k) {
        term = term * nil;
        sum += ((k % 2) ? 1.0 : -1.0) / double(k) * term;
      }
      return std::log(d) * Mat::Identity(n, n) + sum;
    }
    return m.log();
  }
  Eigen::EigenSolver<Mat> es(m, false);
  const double scale = m.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < n; ++i) {
    auto l = es.eigenvalues()(i);
    if (std::abs(l.imag()) > 1e-12 * scale || !(l.real() > 0.0))
      fail(ErrorCode::NonPositiveDiagonal, "spectrum not real positive");
  }
  return m.log();
}

}  // namespace gcusp
