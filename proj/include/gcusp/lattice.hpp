#pragma once
// Real lattices given by column bases. Subgroup equality is decided on
// integer data recovered by rational reconstruction, never on raw floats.

#include "gcusp/core.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <vector>

namespace gcusp::lattice {

inline constexpr long long kMaxDenominator = 1000000;

struct Fraction {
  long long num = 0;
  long long den = 1;
};

// Best continued-fraction approximation with den <= max_den, accepted only if
// it reproduces x to tol (relative to max(1,|x|)).
inline std::optional<Fraction> reconstruct(double x, long long max_den = kMaxDenominator,
                                           double tol = 1e-9) {
  if (!std::isfinite(x)) return std::nullopt;
  long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double r = x;
  for (int it = 0; it < 64; ++it) {
    const double a = std::floor(r);
    if (std::abs(a) > 9e15) break;
    const long long ai = static_cast<long long>(a);
    const long long p2 = ai * p1 + p0;
    const long long q2 = ai * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    const double frac = r - a;
    if (std::abs(double(p1) / double(q1) - x) <= 1e-15 * std::max(1.0, std::abs(x))) break;
    if (frac < 1e-300) break;
    r = 1.0 / frac;
  }
  if (q1 == 0) return std::nullopt;
  if (std::abs(double(p1) / double(q1) - x) > tol * std::max(1.0, std::abs(x))) return std::nullopt;
  return Fraction{p1, q1};
}

using IntMat = std::vector<std::vector<long long>>;  // row-major k x m

// Column-style Hermite reduction: returns a k x k lower-triangular integer
// basis of the column lattice of a rank-k integer matrix.
inline IntMat hermite_columns(IntMat a) {
  const int k = int(a.size());
  const int m = k ? int(a[0].size()) : 0;
  auto col_axpy = [&](int dst, int src, long long q) {
    for (int r = 0; r < k; ++r) a[r][dst] -= q * a[r][src];
  };
  auto col_swap = [&](int x, int y) {
    for (int r = 0; r < k; ++r) std::swap(a[r][x], a[r][y]);
  };
  for (int row = 0; row < k; ++row) {
    for (;;) {
      int piv = -1;
      for (int j = row; j < m; ++j)
        if (a[row][j] != 0 && (piv < 0 || std::llabs(a[row][j]) < std::llabs(a[row][piv]))) piv = j;
      if (piv < 0) fail(ErrorCode::DegenerateLattice, "translation parts do not span");
      col_swap(row, piv);
      bool done = true;
      for (int j = row + 1; j < m; ++j) {
        if (a[row][j] == 0) continue;
        col_axpy(j, row, a[row][j] / a[row][row]);
        if (a[row][j] != 0) done = false;
      }
      if (done) break;
    }
    if (a[row][row] < 0)
      for (int r = 0; r < k; ++r) a[r][row] = -a[r][row];
    for (int j = 0; j < row; ++j) {
      long long q = a[row][j] / a[row][row];
      if (a[row][j] - q * a[row][row] < 0) --q;
      col_axpy(j, row, q);
    }
  }
  IntMat h(k, std::vector<long long>(k));
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < k; ++c) h[r][c] = a[r][c];
  return h;
}

// Basis (k x k) of the Z-span of the columns of v (k x m). Throws
// DegenerateLattice when the span has rank < k or is not discrete at the
// reconstruction bound.
inline Mat basis_of_span(const Mat& v) {
  const int k = int(v.rows());
  if (k == 0) return Mat(0, 0);
  if (v.cols() < k) fail(ErrorCode::DegenerateLattice, "fewer vectors than dimensions");
  const double scale = std::max(1e-300, v.cwiseAbs().maxCoeff());
  // greedy independent subset in input order
  std::vector<int> order(v.cols());
  std::iota(order.begin(), order.end(), 0);
  std::vector<int> chosen;
  Mat b0(k, 0);
  for (int j : order) {
    Mat trial(k, b0.cols() + 1);
    trial << b0, v.col(j);
    Eigen::JacobiSVD<Mat> svd(trial);
    if (svd.singularValues().minCoeff() > 1e-8 * scale) {
      b0 = trial;
      chosen.push_back(j);
      if (int(chosen.size()) == k) break;
    }
  }
  if (int(chosen.size()) < k) fail(ErrorCode::DegenerateLattice, "translation parts do not span");
  const Mat c = b0.partialPivLu().solve(v);
  long long den = 1;
  std::vector<std::vector<Fraction>> fr(k, std::vector<Fraction>(v.cols()));
  for (int r = 0; r < k; ++r)
    for (int j = 0; j < v.cols(); ++j) {
      const auto f = reconstruct(c(r, j));
      if (!f) fail(ErrorCode::DegenerateLattice, "translation parts are not commensurable");
      fr[r][j] = *f;
      den = std::lcm(den, f->den);
      if (den > kMaxDenominator) fail(ErrorCode::DegenerateLattice, "denominator bound exceeded");
    }
  IntMat a(k, std::vector<long long>(v.cols()));
  for (int r = 0; r < k; ++r)
    for (int j = 0; j < v.cols(); ++j) a[r][j] = fr[r][j].num * (den / fr[r][j].den);
  const IntMat h = hermite_columns(a);
  Mat hm(k, k);
  for (int r = 0; r < k; ++r)
    for (int cc = 0; cc < k; ++cc) hm(r, cc) = double(h[r][cc]) / double(den);
  return b0 * hm;
}

// Integer matrix approximated by m, if every entry is within tol of an integer.
inline std::optional<Mat> integral(const Mat& m, double tol = 1e-6) {
  Mat r = m.array().round().matrix();
  if ((r - m).cwiseAbs().maxCoeff() > tol) return std::nullopt;
  return r;
}

inline bool in_lattice(const Mat& basis, const Vec& w, double tol = 1e-6) {
  const Vec c = basis.partialPivLu().solve(w);
  return integral(c, tol).has_value();
}

inline bool same_lattice(const Mat& a, const Mat& b, double tol = 1e-6) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  const auto u = integral(a.partialPivLu().solve(b), tol);
  return u && std::abs(std::abs(u->determinant()) - 1.0) < 1e-6;
}

struct Reduced {
  Mat basis;   // b * coeffs
  Mat coeffs;  // integral, unimodular
};

// LLL with delta = 0.99; Gram-Schmidt recomputed per step (dimensions are small).
inline Reduced lll(const Mat& b_in, double delta = 0.99) {
  const int k = int(b_in.cols());
  Mat b = b_in;
  Mat u = Mat::Identity(k, k);
  auto gso = [&](Mat& bstar, Mat& mu) {
    bstar = b;
    mu = Mat::Zero(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < i; ++j) {
        mu(i, j) = b.col(i).dot(bstar.col(j)) / bstar.col(j).squaredNorm();
        bstar.col(i) -= mu(i, j) * bstar.col(j);
      }
  };
  Mat bs, mu;
  gso(bs, mu);
  int i = 1;
  int guard = 0;
  while (i < k && ++guard < 100000) {
    for (int j = i - 1; j >= 0; --j) {
      const double q = std::round(mu(i, j));
      if (q != 0.0) {
        b.col(i) -= q * b.col(j);
        u.col(i) -= q * u.col(j);
        gso(bs, mu);
      }
    }
    if (bs.col(i).squaredNorm() >= (delta - mu(i, i - 1) * mu(i, i - 1)) * bs.col(i - 1).squaredNorm()) {
      ++i;
    } else {
      b.col(i).swap(b.col(i - 1));
      u.col(i).swap(u.col(i - 1));
      gso(bs, mu);
      i = std::max(i - 1, 1);
    }
  }
  return {b, u};
}

// LLL-reduced basis sorted by (norm, coefficient vector), each coefficient
// vector's first nonzero entry made positive. Coefficients refer to the
// input basis, so the result is equivariant under rotating the input.
inline Reduced canonical_basis(const Mat& b) {
  Reduced r = lll(b);
  const int k = int(b.cols());
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < k; ++i) {
      if (r.coeffs(i, j) == 0.0) continue;
      if (r.coeffs(i, j) < 0) {
        r.coeffs.col(j) = -r.coeffs.col(j);
        r.basis.col(j) = -r.basis.col(j);
      }
      break;
    }
  }
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  const double tol = 1e-9 * std::max(1.0, r.basis.cwiseAbs().maxCoeff());
  std::sort(idx.begin(), idx.end(), [&](int x, int y) {
    const double nx = r.basis.col(x).norm(), ny = r.basis.col(y).norm();
    if (std::abs(nx - ny) > tol) return nx < ny;
    for (int i = 0; i < k; ++i)
      if (r.coeffs(i, x) != r.coeffs(i, y)) return r.coeffs(i, x) > r.coeffs(i, y);
    return false;
  });
  Reduced out{Mat(b.rows(), k), Mat(k, k)};
  for (int j = 0; j < k; ++j) {
    out.basis.col(j) = r.basis.col(idx[j]);
    out.coeffs.col(j) = r.coeffs.col(idx[j]);
  }
  return out;
}

// All nonzero lattice vectors of norm <= radius (Fincke-Pohst).
inline std::vector<Vec> short_vectors(const Mat& basis, double radius) {
  const int k = int(basis.cols());
  Eigen::HouseholderQR<Mat> qr(basis);
  const Mat r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const double r2 = radius * radius * (1 + 1e-9) + 1e-18;
  std::vector<Vec> out;
  Vec x = Vec::Zero(k);
  std::function<void(int, double)> rec = [&](int i, double partial) {
    if (i < 0) {
      if (x.cwiseAbs().maxCoeff() > 0) out.push_back(basis * x);
      return;
    }
    double centre = 0.0;
    for (int j = i + 1; j < k; ++j) centre -= r(i, j) * x(j);
    centre /= r(i, i);
    const double span = std::sqrt(std::max(0.0, r2 - partial)) / std::abs(r(i, i));
    const long long lo = static_cast<long long>(std::ceil(centre - span - 1e-12));
    const long long hi = static_cast<long long>(std::floor(centre + span + 1e-12));
    for (long long c = lo; c <= hi; ++c) {
      x(i) = double(c);
      double acc = 0.0;
      for (int j = i; j < k; ++j) acc += r(i, j) * x(j);
      const double next = partial + acc * acc;
      if (next <= r2) rec(i - 1, next);
    }
    x(i) = 0.0;
  };
  rec(k - 1, 0.0);
  return out;
}

// Searches for an orthogonal Q with Q * lattice(b1) = lattice(b2) that
// satisfies accept(Q). Bases need not be reduced.
inline std::optional<Mat> find_isometry(const Mat& b1, const Mat& b2,
                                        const std::function<bool(const Mat&)>& accept,
                                        double tol = 1e-7) {
  const int k = int(b1.cols());
  if (std::abs(std::abs(b1.determinant()) - std::abs(b2.determinant())) >
      tol * std::max(1.0, std::abs(b1.determinant())))
    return std::nullopt;
  const Mat r1 = lll(b1).basis;
  const Mat r2 = lll(b2).basis;
  const Mat g1 = r1.transpose() * r1;
  const double scale = std::max(1.0, g1.cwiseAbs().maxCoeff());
  double longest = 0.0;
  for (int j = 0; j < k; ++j) longest = std::max(longest, r1.col(j).norm());
  const std::vector<Vec> pool = short_vectors(r2, longest);
  std::vector<std::vector<int>> cand(k);
  for (int j = 0; j < k; ++j)
    for (int c = 0; c < int(pool.size()); ++c)
      if (std::abs(pool[c].squaredNorm() - g1(j, j)) <= tol * scale) cand[j].push_back(c);
  Mat w(r1.rows(), k);
  std::optional<Mat> found;
  std::function<void(int)> rec = [&](int j) {
    if (found) return;
    if (j == k) {
      const Mat q = w * r1.inverse();
      if ((q.transpose() * q - Mat::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-6) return;
      if (!same_lattice(q * r1, r2)) return;
      if (accept(q)) found = q;
      return;
    }
    for (int c : cand[j]) {
      bool ok = true;
      for (int i = 0; i < j && ok; ++i) ok = std::abs(pool[c].dot(w.col(i)) - g1(i, j)) <= tol * scale;
      if (!ok) continue;
      w.col(j) = pool[c];
      rec(j + 1);
      if (found) return;
    }
  };
  rec(0);
  return found;
}

}  // namespace gcusp::lattice
