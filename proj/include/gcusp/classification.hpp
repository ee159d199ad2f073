#pragma once
// Lattices in G(psi), their conjugacy classes, the anisotropy coset
// parameterization, psi recovery for restricted shapes, and the normal forms
// in dimensions two and three.
//
// Conventions. A generator (params, o) is the element m*(params) o. Its
// Euclidean form on a horosphere is w -> R w + v with R = E rho(o) E^{-1} and
// v = E xi, where E = L^T comes from the horosphere Gram. Theta(L, A) is the
// class of A^{-1} sigma(L) A, so the coset A O(psi) acts on the right.

#include "gcusp/groups.hpp"
#include "gcusp/lattice.hpp"
#include "gcusp/metrics.hpp"
#include "gcusp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace gcusp {

struct LatticeGenerator {
  TranslationParams params;
  OrthDescriptor orth;
};

struct MarkedLattice {
  WeylVector psi;
  std::vector<LatticeGenerator> generators;
};

struct AnisotropyCoset {
  Mat representative;
};

struct Dim2Params {
  double y1 = 0.0;
  double y2 = 0.0;
};

// Lattice whose generators are pure translations with the given chart
// coordinates (columns of xi).
inline MarkedLattice translation_lattice(const WeylVector& psi, const Mat& xi) {
  MarkedLattice L{psi, {}};
  for (int j = 0; j < xi.cols(); ++j) L.generators.push_back({params_from_xi(psi, xi.col(j)), orth_identity(psi)});
  return L;
}

inline bool translation_only(const MarkedLattice& L) {
  for (const auto& g : L.generators)
    if (!g.orth.is_identity()) return false;
  return true;
}

inline std::vector<EuclideanIsometry> euclidean_generators(const EuclideanChart& ch, const MarkedLattice& L) {
  std::vector<EuclideanIsometry> out;
  for (const auto& g : L.generators) {
    validate_orth(L.psi, g.orth);
    out.push_back({ch.euclid_linear(rho_matrix(L.psi, g.orth)),
                   ch.euclid_translation(chart_xi(L.psi, g.params))});
  }
  return out;
}

// Euclidean image of O(psi): recovers o from its action on chart coordinates.
inline std::optional<OrthDescriptor> orth_from_rho(const WeylVector& psi, const Mat& rho, double tol = 1e-7) {
  const DomainShape s = make_domain(psi);
  const int k = s.n - 1;
  if (rho.rows() != k || rho.cols() != k) return std::nullopt;
  if (s.u <= 1) {
    for (const auto& o : orth_elements(psi))
      if ((rho_matrix(psi, o) - rho).cwiseAbs().maxCoeff() <= tol) return o;
    return std::nullopt;
  }
  // u >= 2 means t <= n-2 < n, so rho is a permutation of X plus a block on Y.
  if (s.r > 0 && (rho.topRightCorner(s.r, s.u).cwiseAbs().maxCoeff() > tol ||
                  rho.bottomLeftCorner(s.u, s.r).cwiseAbs().maxCoeff() > tol))
    return std::nullopt;
  OrthDescriptor o = orth_identity(psi);
  const Mat px = rho.topLeftCorner(s.r, s.r);
  for (int i = 0; i < s.r; ++i) {
    int hit = -1;
    for (int j = 0; j < s.r; ++j)
      if (std::abs(px(j, i) - 1.0) <= tol) hit = j;
      else if (std::abs(px(j, i)) > tol) return std::nullopt;
    if (hit < 0 || !psi.equal(i, hit)) return std::nullopt;
    o.perm[i] = hit;
  }
  o.block = rho.bottomRightCorner(s.u, s.u);
  if ((o.block.transpose() * o.block - Mat::Identity(s.u, s.u)).cwiseAbs().maxCoeff() > tol) return std::nullopt;
  try {
    validate_orth(psi, o);
  } catch (const Error&) {
    return std::nullopt;
  }
  return o;
}

namespace detail {

inline bool mat_close(const Mat& a, const Mat& b, double tol = 1e-8) {
  return (a - b).cwiseAbs().maxCoeff() <= tol;
}

// Crystallographic data: point group, one translation part per point-group
// element, and the translation lattice.
struct CrystalData {
  std::vector<Mat> point;
  std::vector<Vec> shift;
  Mat lattice;

  int find(const Mat& r) const {
    for (std::size_t i = 0; i < point.size(); ++i)
      if (mat_close(point[i], r)) return int(i);
    return -1;
  }
};

inline constexpr std::size_t kMaxPointGroup = 512;

// Schreier transversal over the point group; the Schreier generators are
// pure translations and span the translation lattice.
inline CrystalData crystal(const std::vector<EuclideanIsometry>& gens, int k) {
  CrystalData c;
  c.point.push_back(Mat::Identity(k, k));
  c.shift.push_back(Vec::Zero(k));
  std::vector<Vec> trans;
  for (std::size_t head = 0; head < c.point.size(); ++head) {
    for (const auto& g : gens) {
      const Mat r = c.point[head] * g.R;
      const Vec v = c.point[head] * g.v + c.shift[head];
      const int at = c.find(r);
      if (at < 0) {
        if (c.point.size() >= kMaxPointGroup)
          fail(ErrorCode::UnsupportedLattice, "rotational parts generate an infinite group");
        c.point.push_back(r);
        c.shift.push_back(v);
      } else {
        trans.push_back(v - c.shift[at]);
      }
    }
  }
  Mat tv(k, trans.size());
  for (std::size_t j = 0; j < trans.size(); ++j) tv.col(j) = trans[j];
  c.lattice = lattice::basis_of_span(tv);
  return c;
}

inline CrystalData conjugate(const CrystalData& c, const Mat& q) {
  CrystalData out;
  for (std::size_t i = 0; i < c.point.size(); ++i) {
    out.point.push_back(q * c.point[i] * q.transpose());
    out.shift.push_back(q * c.shift[i]);
  }
  out.lattice = q * c.lattice;
  return out;
}

// Is there a translation c with (a conjugated by c) == b? Cocycle condition
// checked on the images of the rotational generators; c is searched over a
// bounded box of lattice corrections.
inline bool equal_up_to_translation(const CrystalData& a, const CrystalData& b,
                                    const std::vector<Mat>& rot_gens) {
  if (a.point.size() != b.point.size()) return false;
  for (const auto& r : a.point)
    if (b.find(r) < 0) return false;
  if (!lattice::same_lattice(a.lattice, b.lattice)) return false;
  const int k = int(a.lattice.rows());
  std::vector<Mat> gens;
  std::vector<Vec> delta;
  for (const auto& r : rot_gens) {
    if (mat_close(r, Mat::Identity(k, k))) continue;
    if (std::any_of(gens.begin(), gens.end(), [&](const Mat& g) { return mat_close(g, r); })) continue;
    gens.push_back(r);
    delta.push_back(b.shift[b.find(r)] - a.shift[a.find(r)]);
  }
  auto cocycle_ok = [&](const Vec& c) {
    for (std::size_t i = 0; i < a.point.size(); ++i) {
      const Vec d = b.shift[b.find(a.point[i])] - a.shift[i] - (Mat::Identity(k, k) - a.point[i]) * c;
      if (!lattice::in_lattice(a.lattice, d)) return false;
    }
    return true;
  };
  if (gens.empty()) return cocycle_ok(Vec::Zero(k));
  const int m = int(gens.size());
  if (m * k > 8) fail(ErrorCode::UnsupportedLattice, "too many rotational generators for the translation search");
  Mat sys(m * k, k);
  for (int i = 0; i < m; ++i) sys.middleRows(i * k, k) = Mat::Identity(k, k) - gens[i];
  const auto solver = sys.completeOrthogonalDecomposition();
  const int box = 2;
  const int width = 2 * box + 1;
  long long total = 1;
  for (int i = 0; i < m * k; ++i) total *= width;
  Vec rhs(m * k);
  for (long long code = 0; code < total; ++code) {
    long long c = code;
    for (int i = 0; i < m; ++i) {
      Vec lam(k);
      for (int j = 0; j < k; ++j) {
        lam(j) = double(c % width - box);
        c /= width;
      }
      rhs.segment(i * k, k) = delta[i] - a.lattice * lam;
    }
    const Vec sol = solver.solve(rhs);
    if ((sys * sol - rhs).cwiseAbs().maxCoeff() > 1e-7) continue;
    if (cocycle_ok(sol)) return true;
  }
  return false;
}

inline Mat translation_vectors(const std::vector<EuclideanIsometry>& e) {
  Mat v(e.empty() ? 0 : e[0].v.size(), e.size());
  for (std::size_t j = 0; j < e.size(); ++j) v.col(j) = e[j].v;
  return v;
}

inline void require_lattice_shape(const MarkedLattice& L) {
  const DomainShape s = make_domain(L.psi);
  if (int(L.generators.size()) < s.n - 1) fail(ErrorCode::DegenerateLattice, "too few generators");
}

}  // namespace detail

// psi' = t psi componentwise; psi = psi' = 0 gives t = 1.
inline std::optional<double> scale_equivalence(const WeylVector& a, const WeylVector& b, double tol = 1e-10) {
  if (a.n() != b.n()) return std::nullopt;
  const bool za = a.is_zero(0), zb = b.is_zero(0);
  if (za || zb) return (za && zb) ? std::optional<double>(1.0) : std::nullopt;
  const double t = b[0] / a[0];
  for (int i = 0; i < a.n(); ++i)
    if (std::abs(b[i] - t * a[i]) > tol * std::max(1.0, std::abs(b[i]))) return std::nullopt;
  return t;
}

// The same group written for psi / c: Y scales by 1/sqrt(c), X is unchanged.
inline MarkedLattice rescale_to(const MarkedLattice& L, const WeylVector& target) {
  const auto c = scale_equivalence(target, L.psi);
  if (!c) fail(ErrorCode::MixedPsi, "lattices live in different G(psi)");
  MarkedLattice out{target, L.generators};
  const double f = 1.0 / std::sqrt(*c);
  for (auto& g : out.generators) g.params.Y *= f;
  return out;
}

inline void validate(const MarkedLattice& L) {
  detail::require_lattice_shape(L);
  const EuclideanChart ch(L.psi);
  const auto e = euclidean_generators(ch, L);
  if (translation_only(L)) {
    lattice::basis_of_span(detail::translation_vectors(e));
  } else {
    detail::crystal(e, L.psi.n() - 1);
  }
}

inline AnisotropyCoset make_coset(const Mat& a) {
  if (a.rows() != a.cols() || (a.transpose() * a - Mat::Identity(a.rows(), a.cols())).cwiseAbs().maxCoeff() > 1e-10)
    fail(ErrorCode::InvalidArgument, "coset representative is not orthogonal");
  return {a};
}

struct LatticeInvariants {
  Mat gram;                              // Euclidean Gram of the marked translation parts
  std::optional<AnisotropyCoset> coset;  // only for translation-only lattices
  Mat canonical;                         // canonical basis of the translation lattice
};

namespace detail {

// Rotation Q with Q^T B upper triangular with positive diagonal.
inline Mat section_frame(const Mat& canonical) {
  const int k = int(canonical.rows());
  Eigen::HouseholderQR<Mat> qr(canonical);
  Mat q = qr.householderQ();
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < k; ++i)
    if (r(i, i) < 0) q.col(i) = -q.col(i);
  return q;
}

inline Mat translation_lattice_of(const MarkedLattice& L, const std::vector<EuclideanIsometry>& e) {
  if (translation_only(L)) return lattice::basis_of_span(translation_vectors(e));
  return crystal(e, L.psi.n() - 1).lattice;
}

// Section basis: the first spanning run of pure-translation generators in
// marking order, else the canonical basis of the translation lattice.
inline Mat section_basis(const MarkedLattice& L, const std::vector<EuclideanIsometry>& e) {
  const int k = L.psi.n() - 1;
  Mat b(k, 0);
  for (std::size_t i = 0; i < e.size() && b.cols() < k; ++i) {
    if (!L.generators[i].orth.is_identity()) continue;
    Mat trial(k, b.cols() + 1);
    trial << b, e[i].v;
    Eigen::JacobiSVD<Mat> svd(trial);
    if (svd.singularValues().minCoeff() > 1e-9 * std::max(1.0, trial.cwiseAbs().maxCoeff())) b = trial;
  }
  if (b.cols() == k) return b;
  return lattice::canonical_basis(translation_lattice_of(L, e)).basis;
}

}  // namespace detail

inline LatticeInvariants lattice_invariants(const MarkedLattice& L) {
  detail::require_lattice_shape(L);
  const EuclideanChart ch(L.psi);
  const auto e = euclidean_generators(ch, L);
  const Mat v = detail::translation_vectors(e);
  LatticeInvariants out;
  out.gram = v.transpose() * v;
  out.canonical = lattice::canonical_basis(detail::translation_lattice_of(L, e)).basis;
  if (translation_only(L)) out.coset = AnisotropyCoset{detail::section_frame(detail::section_basis(L, e)).transpose()};
  return out;
}

// Theta(L, A) = A^{-1} sigma(L) A with sigma(L) = Q^T L Q, Q the section frame.
inline MarkedLattice theta_map(const MarkedLattice& L, const AnisotropyCoset& coset) {
  detail::require_lattice_shape(L);
  const EuclideanChart ch(L.psi);
  const int k = L.psi.n() - 1;
  make_coset(coset.representative);
  require_dim(coset.representative.rows(), k, "coset representative");
  const auto e = euclidean_generators(ch, L);
  // Lattices with rotations are their own section: a frame change could move
  // the point group out of O(psi).
  const Mat frame = translation_only(L) ? detail::section_frame(detail::section_basis(L, e)) : Mat::Identity(k, k);
  const Mat w = coset.representative.transpose() * frame.transpose();
  MarkedLattice out{L.psi, {}};
  for (const auto& g : e) {
    const Mat r = w * g.R * w.transpose();
    const auto o = orth_from_rho(L.psi, ch.xi_linear(r));
    if (!o) fail(ErrorCode::RotationalPartOutsidePsi, "conjugated rotational part is not in O(psi)");
    out.generators.push_back({params_from_xi(L.psi, ch.xi_from_euclid(w * g.v)), *o});
  }
  return out;
}

namespace detail {

inline bool infinite_orth(const WeylVector& psi) { return make_domain(psi).u >= 2; }

inline std::vector<Mat> euclidean_orth_group(const EuclideanChart& ch) {
  std::vector<Mat> out;
  for (const auto& o : orth_elements(ch.psi())) out.push_back(ch.euclid_linear(rho_matrix(ch.psi(), o)));
  return out;
}

inline void reject_continuous_rotations(const MarkedLattice& L) {
  if (infinite_orth(L.psi) && !translation_only(L))
    fail(ErrorCode::UnsupportedLattice, "rotational parts in a continuous O(u) are not supported");
}

}  // namespace detail

// Unmarked conjugacy in G(psi). For psi = 0 the similarity class decides.
inline bool are_conjugate(const MarkedLattice& l1, const MarkedLattice& l2_in) {
  const MarkedLattice l2 = rescale_to(l2_in, l1.psi);
  detail::require_lattice_shape(l1);
  detail::require_lattice_shape(l2);
  detail::reject_continuous_rotations(l1);
  detail::reject_continuous_rotations(l2);
  const EuclideanChart ch(l1.psi);
  const int k = l1.psi.n() - 1;
  const auto e1 = euclidean_generators(ch, l1);
  const auto e2 = euclidean_generators(ch, l2);
  if (translation_only(l1) && translation_only(l2)) {
    Mat b1 = lattice::basis_of_span(detail::translation_vectors(e1));
    Mat b2 = lattice::basis_of_span(detail::translation_vectors(e2));
    if (l1.psi.is_zero(0)) {
      b1 /= std::pow(std::abs(b1.determinant()), 1.0 / k);
      b2 /= std::pow(std::abs(b2.determinant()), 1.0 / k);
      return lattice::find_isometry(b1, b2, [](const Mat&) { return true; }).has_value();
    }
    if (detail::infinite_orth(l1.psi)) {
      const WeylVector& psi = l1.psi;
      return lattice::find_isometry(b1, b2, [&](const Mat& q) {
               return orth_from_rho(psi, ch.xi_linear(q)).has_value();
             }).has_value();
    }
    for (const Mat& q : detail::euclidean_orth_group(ch))
      if (lattice::same_lattice(q * b1, b2)) return true;
    return false;
  }
  if (detail::infinite_orth(l1.psi))
    fail(ErrorCode::UnsupportedLattice, "rotational lattices need a finite O(psi)");
  const auto c1 = detail::crystal(e1, k);
  const auto c2 = detail::crystal(e2, k);
  for (const Mat& q : detail::euclidean_orth_group(ch)) {
    const auto c1q = detail::conjugate(c1, q);
    std::vector<Mat> rots;
    for (const auto& g : e1) rots.push_back(q * g.R * q.transpose());
    if (detail::equal_up_to_translation(c1q, c2, rots)) return true;
  }
  return false;
}

// Marked conjugacy: some g in G(psi) carries generator i of l1 to generator i
// of l2 for every i.
inline bool marked_conjugate(const MarkedLattice& l1, const MarkedLattice& l2_in, double tol = 1e-7) {
  const MarkedLattice l2 = rescale_to(l2_in, l1.psi);
  if (l1.generators.size() != l2.generators.size()) return false;
  const EuclideanChart ch(l1.psi);
  const int k = l1.psi.n() - 1;
  const auto e1 = euclidean_generators(ch, l1);
  const auto e2 = euclidean_generators(ch, l2);
  auto try_q = [&](const Mat& q) {
    const int m = int(e1.size());
    Mat sys(m * k, k);
    Vec rhs(m * k);
    for (int i = 0; i < m; ++i) {
      if (!detail::mat_close(q * e1[i].R * q.transpose(), e2[i].R, tol)) return false;
      sys.middleRows(i * k, k) = Mat::Identity(k, k) - e2[i].R;
      rhs.segment(i * k, k) = e2[i].v - q * e1[i].v;
    }
    const Vec c = sys.completeOrthogonalDecomposition().solve(rhs);
    return (sys * c - rhs).cwiseAbs().maxCoeff() <= tol * std::max(1.0, rhs.cwiseAbs().maxCoeff());
  };
  if (!detail::infinite_orth(l1.psi)) {
    for (const Mat& q : detail::euclidean_orth_group(ch))
      if (try_q(q)) return true;
    return false;
  }
  detail::reject_continuous_rotations(l1);
  detail::reject_continuous_rotations(l2);
  const Mat v1 = detail::translation_vectors(e1), v2 = detail::translation_vectors(e2);
  Eigen::JacobiSVD<Mat> svd(v1);
  if (svd.rank() < k) fail(ErrorCode::DegenerateLattice, "translation parts do not span");
  const Mat q = v2 * v1.completeOrthogonalDecomposition().pseudoInverse();
  if ((q.transpose() * q - Mat::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-6) return false;
  if (!detail::mat_close(q * v1, v2, tol * std::max(1.0, v2.cwiseAbs().maxCoeff()))) return false;
  if (!l1.psi.is_zero(0) && !orth_from_rho(l1.psi, ch.xi_linear(q))) return false;
  return true;
}

// ---------------------------------------------------------------------------
// psi recovery for simultaneously diagonal or block-shaped generators.

struct PsiRecovery {
  WeylVector psi;  // normalized so psi_1 = 1, or zero
  Mat conjugator;  // C g C^{-1} lies in T(psi) for every generator g
};

namespace detail {

inline Mat permutation_conjugator(const std::vector<int>& order) {
  const int m = int(order.size());
  Mat p = Mat::Zero(m, m);
  for (int a = 0; a < m; ++a) p(a, order[a]) = 1.0;
  return p;
}

inline bool is_diagonal(const Mat& g) {
  const double scale = g.cwiseAbs().maxCoeff();
  Mat off = g;
  off.diagonal().setZero();
  return off.cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

inline PsiRecovery recover_diagonal(const std::vector<Mat>& gens, int n) {
  Mat logs(gens.size(), n);
  for (std::size_t k = 0; k < gens.size(); ++k)
    for (int i = 0; i < n; ++i) {
      const double ratio = gens[k](i, i) / gens[k](n, n);
      if (!(ratio > 0)) fail(ErrorCode::UnsupportedGroupShape, "diagonal entries must share a sign");
      logs(k, i) = std::log(ratio);
    }
  Eigen::JacobiSVD<Mat> svd(logs, Eigen::ComputeFullV);
  const Vec sv = svd.singularValues();
  const double top = sv.size() ? sv(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) rank += sv(i) > 1e-9 * std::max(top, 1e-300);
  if (rank != n - 1) fail(ErrorCode::UnsupportedGroupShape, "log-eigenvalue span has the wrong rank");
  Vec psi = svd.matrixV().col(n - 1);
  if (psi.sum() < 0) psi = -psi;
  psi /= psi.maxCoeff();
  for (int i = 0; i < n; ++i)
    if (!(psi(i) > 1e-9)) fail(ErrorCode::UnsupportedGroupShape, "kernel vector is not a positive weight");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return psi(a) > psi(b); });
  std::vector<double> sorted(n);
  for (int a = 0; a < n; ++a) sorted[a] = psi(order[a]);
  order.push_back(n);
  return {WeylVector(sorted), permutation_conjugator(order)};
}

inline PsiRecovery recover_block(const std::vector<Mat>& gens_in, int n) {
  std::vector<Mat> gens;
  for (const auto& g : gens_in) gens.push_back(g / g(n, n));
  const double tol = 1e-9;
  std::vector<int> hyp, rest;
  for (int i = 0; i < n; ++i) {
    bool h = false;
    for (const auto& g : gens) h = h || std::abs(g(i, i) - 1.0) > tol;
    (h ? hyp : rest).push_back(i);
  }
  if (rest.empty()) fail(ErrorCode::UnsupportedGroupShape, "no parabolic block");
  // z is the unipotent index whose row reaches into the other unipotent columns
  int z = -1;
  for (int i : rest)
    for (int j : rest)
      if (i != j)
        for (const auto& g : gens)
          if (std::abs(g(i, j)) > tol) z = (z < 0 ? i : z);
  if (z < 0) {
    if (rest.size() != 1) fail(ErrorCode::UnsupportedGroupShape, "cannot locate the parabolic row");
    z = rest[0];
  }
  std::vector<int> ys;
  for (int i : rest)
    if (i != z) ys.push_back(i);
  const int t = int(hyp.size()), u = int(ys.size());
  std::vector<int> order = hyp;
  order.push_back(z);
  order.insert(order.end(), ys.begin(), ys.end());
  order.push_back(n);
  Mat p = permutation_conjugator(order);
  // read (X, Y, corner) per generator and check the shape
  Mat xm(gens.size(), t);
  Vec rhs(gens.size());
  for (std::size_t k = 0; k < gens.size(); ++k) {
    const Mat g = p * gens[k] * p.transpose();
    Mat expect = Mat::Identity(n + 1, n + 1);
    for (int i = 0; i < t; ++i) {
      if (!(g(i, i) > 0)) fail(ErrorCode::UnsupportedGroupShape, "non-positive diagonal");
      xm(k, i) = std::log(g(i, i));
      expect(i, i) = g(i, i);
    }
    const Vec y = g.block(t, t + 1, 1, u).transpose();
    for (int j = 0; j < u; ++j) {
      expect(t, t + 1 + j) = y(j);
      expect(t + 1 + j, n) = y(j);
    }
    expect(t, n) = g(t, n);
    if (!mat_close(g, expect, 1e-8 * std::max(1.0, g.cwiseAbs().maxCoeff())))
      fail(ErrorCode::UnsupportedGroupShape, "generator is not in block shape");
    rhs(k) = 0.5 * y.squaredNorm() - g(t, n);
  }
  std::vector<double> psi(n, 0.0);
  Mat conj = p;
  if (t > 0) {
    Eigen::JacobiSVD<Mat> svd(xm, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-9);
    if (svd.rank() < t) fail(ErrorCode::UnsupportedGroupShape, "hyperbolic parameters do not span");
    const Vec w = svd.solve(rhs);
    if ((xm * w - rhs).cwiseAbs().maxCoeff() > 1e-7 * std::max(1.0, rhs.cwiseAbs().maxCoeff()))
      fail(ErrorCode::UnsupportedGroupShape, "corner entries are inconsistent with a single psi");
    for (int i = 0; i < t; ++i)
      if (!(w(i) > 1e-12)) fail(ErrorCode::UnsupportedGroupShape, "recovered weight is not positive");
    std::vector<int> sort(t);
    std::iota(sort.begin(), sort.end(), 0);
    std::stable_sort(sort.begin(), sort.end(), [&](int a, int b) { return w(a) > w(b); });
    std::vector<int> full(n + 1);
    std::iota(full.begin(), full.end(), 0);
    for (int a = 0; a < t; ++a) full[a] = sort[a];
    conj = permutation_conjugator(full) * conj;
    const double top = w(sort[0]);
    for (int a = 0; a < t; ++a) psi[a] = w(sort[a]) / top;
    Mat d = Mat::Identity(n + 1, n + 1);
    d(t, t) = 1.0 / std::sqrt(top);
    d(n, n) = std::sqrt(top);
    conj = d * conj;
  } else {
    for (std::size_t k = 0; k < gens.size(); ++k)
      if (std::abs(rhs(k)) > 1e-8 * std::max(1.0, std::abs(gens[k](t, n))))
        fail(ErrorCode::UnsupportedGroupShape, "parabolic corner mismatch");
  }
  // spanning check on the recovered group
  const WeylVector wv(psi);
  Mat xi(n - 1, gens.size());
  for (std::size_t k = 0; k < gens.size(); ++k)
    xi.col(k) = chart_xi(wv, semidirect_decompose(wv, conj * gens[k] * conj.inverse()).params);
  Eigen::JacobiSVD<Mat> check(xi);
  check.setThreshold(1e-9);
  if (check.rank() < n - 1) fail(ErrorCode::UnsupportedGroupShape, "generators do not span T(psi)");
  return {wv, conj};
}

}  // namespace detail

inline PsiRecovery recover_psi(const std::vector<Mat>& gens) {
  if (gens.empty()) fail(ErrorCode::UnsupportedGroupShape, "no generators");
  const int n = int(gens[0].rows()) - 1;
  if (n < 1) fail(ErrorCode::UnsupportedGroupShape, "matrices too small");
  for (const auto& g : gens) {
    if (g.rows() != n + 1 || g.cols() != n + 1) fail(ErrorCode::DimensionMismatch, "generator sizes differ");
    if (!(std::abs(g(n, n)) > 0)) fail(ErrorCode::UnsupportedGroupShape, "zero homogeneous entry");
  }
  for (std::size_t a = 0; a < gens.size(); ++a)
    for (std::size_t b = a + 1; b < gens.size(); ++b) {
      const Mat c = gens[a] * gens[b] - gens[b] * gens[a];
      const double scale = std::max(1.0, (gens[a] * gens[b]).cwiseAbs().maxCoeff());
      if (c.cwiseAbs().maxCoeff() > 1e-8 * scale) fail(ErrorCode::UnsupportedGroupShape, "generators do not commute");
    }
  bool diag = true;
  for (const auto& g : gens) diag = diag && detail::is_diagonal(g);
  return diag ? detail::recover_diagonal(gens, n) : detail::recover_block(gens, n);
}

// ---------------------------------------------------------------------------
// Dimension two.

enum class Dim2Family { Diagonal, Mixed, Unipotent };

inline const char* to_string(Dim2Family f) {
  switch (f) {
    case Dim2Family::Diagonal: return "Diagonal";
    case Dim2Family::Mixed: return "Mixed";
    case Dim2Family::Unipotent: return "Unipotent";
  }
  return "?";
}

struct Dim2NormalForm {
  Dim2Family family = Dim2Family::Unipotent;
  Vec logs;                  // Diagonal: descending log-eigenvalues (after any inversion)
  double psi_ratio = 0.0;    // Diagonal: psi_2 / psi_1 in [0, 1]
  bool inverted = false;     // Diagonal: A was replaced by A^{-1}
  double a = 0.0;            // Mixed: log of the simple eigenvalue over the double one
};

namespace detail {

inline std::vector<EigenCluster> real_positive_spectrum(const Mat& a_in, Mat* used = nullptr) {
  Mat a = a_in;
  auto clusters = jordan_structure(a);
  double rad = 0.0;
  for (const auto& c : clusters) rad = std::max(rad, std::abs(c.value));
  for (const auto& c : clusters)
    if (std::abs(c.value.imag()) > 1e-8 * std::max(rad, 1e-300))
      fail(ErrorCode::ComplexSpectrum, "spectrum is not real");
  bool pos = false, neg = false;
  for (const auto& c : clusters) (c.value.real() > 0 ? pos : neg) = true;
  if (pos && neg) fail(ErrorCode::MixedSigns, "eigenvalues of both signs");
  if (neg) {
    a = -a;
    clusters = jordan_structure(a);
  }
  if (used) *used = a;
  return clusters;
}

}  // namespace detail

inline Dim2NormalForm dim2_normal_form(const Mat& A) {
  require_dim(A.rows(), 3, "matrix rows");
  require_dim(A.cols(), 3, "matrix cols");
  (void)ProjMap(A);
  auto cl = detail::real_positive_spectrum(A);
  Dim2NormalForm out;
  if (cl.size() == 3) {
    std::vector<double> l;
    for (const auto& c : cl) l.push_back(std::log(c.value.real()));
    std::sort(l.begin(), l.end(), std::greater<double>());
    double ratio = (l[1] - l[2]) / (l[0] - l[1]);
    if (ratio > 1.0) {
      out.inverted = true;
      l = {-l[2], -l[1], -l[0]};
      ratio = 1.0 / ratio;
    }
    out.family = Dim2Family::Diagonal;
    out.logs = Eigen::Map<Vec>(l.data(), 3);
    out.psi_ratio = ratio;
    return out;
  }
  if (cl.size() == 2) {
    const EigenCluster& dbl = cl[0].multiplicity == 2 ? cl[0] : cl[1];
    const EigenCluster& sgl = cl[0].multiplicity == 2 ? cl[1] : cl[0];
    if (dbl.block_sizes.size() != 1) fail(ErrorCode::DegenerateSpectrum, "double eigenvalue is diagonalizable");
    out.family = Dim2Family::Mixed;
    out.a = std::log(sgl.value.real() / dbl.value.real());
    return out;
  }
  if (cl[0].block_sizes.size() != 1) fail(ErrorCode::DegenerateSpectrum, "repeated eigenvalue without a 3-block");
  out.family = Dim2Family::Unipotent;
  return out;
}

inline void validate(const Dim2Params& y) {
  if (!(y.y1 >= 0.0) || !(y.y2 >= y.y1)) fail(ErrorCode::OrderViolation, "need y2 >= y1 >= 0");
}

inline Mat dim2_teich(const Dim2Params& y) {
  validate(y);
  Mat m = Mat::Zero(3, 3);
  m(0, 0) = std::exp((2 * y.y2 - y.y1) / 3);
  m(1, 1) = std::exp((2 * y.y1 - y.y2) / 3);
  m(2, 2) = std::exp((-y.y1 - y.y2) / 3);
  m(0, 1) = m(0, 2) = m(1, 2) = 1.0;
  return m;
}

// Inverse of dim2_teich: trace-free descending log-eigenvalues x give
// y2 = x1 - x3, y1 = x2 - x3.
inline Dim2Params dim2_teich_inverse(const Mat& A) {
  require_dim(A.rows(), 3, "matrix rows");
  require_dim(A.cols(), 3, "matrix cols");
  Mat a;
  detail::real_positive_spectrum(A, &a);
  Eigen::EigenSolver<Mat> es(a, false);
  std::vector<double> l;
  for (int i = 0; i < 3; ++i) l.push_back(std::log(std::abs(es.eigenvalues()(i))));
  std::sort(l.begin(), l.end(), std::greater<double>());
  return {std::max(0.0, l[1] - l[2]), std::max(0.0, l[0] - l[2])};
}

// ---------------------------------------------------------------------------
// Dimension three: the four tabulated families. Parameters are (y1, y2) for
// t = 0, (x1, y1) for t = 1, and (x1, x2) for t = 2, 3.

inline GroupElement dim3_family(const WeylVector& psi, const Vec& params) {
  if (psi.n() != 3) fail(ErrorCode::DimensionMismatch, "dimension three only");
  require_dim(params.size(), 2, "parameters");
  const DomainShape s = make_domain(psi);
  const double a = params(0), b = params(1);
  Mat m = Mat::Identity(4, 4);
  TranslationParams tp;
  switch (s.t) {
    case 0:
      m(0, 1) = a;
      m(0, 2) = b;
      m(0, 3) = 0.5 * (a * a + b * b);
      m(1, 3) = a;
      m(2, 3) = b;
      tp = {Vec(0), params};
      break;
    case 1:
      m(0, 0) = std::exp(a);
      m(1, 2) = b;
      m(1, 3) = 0.5 * b * b - psi[0] * a;
      m(2, 3) = b;
      tp = {Vec::Constant(1, a), Vec::Constant(1, b)};
      break;
    case 2:
      m(0, 0) = std::exp(a);
      m(1, 1) = std::exp(b);
      m(2, 3) = -psi[0] * a - psi[1] * b;
      tp = {params, Vec(0)};
      break;
    default:
      m(0, 0) = std::exp(a);
      m(1, 1) = std::exp(b);
      m(2, 2) = std::exp((-psi[0] * a - psi[1] * b) / psi[2]);
      tp = {params, Vec(0)};
      break;
  }
  return {m, Factorization{0.0, tp, orth_identity(psi)}};
}

}  // namespace gcusp
