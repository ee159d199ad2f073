#pragma once

#include <algorithm>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gcusp/domain.hpp"
#include "gcusp/spectral.hpp"

namespace gcusp {

// X has length r, or length n when t = n (then psi(X) = 0 is required).
// Y has length u.
struct TranslationParams {
  Vec X;
  Vec Y;
};

// Full hyperbolic parameter vector: length t. For t = n an (n-1)-vector is
// lifted into ker psi by solving for the last coordinate.
inline Vec full_X(const WeylVector& psi, const DomainShape& s, const Vec& X) {
  if (!s.full()) {
    require_dim(X.size(), s.r, "X");
    return X;
  }
  if (X.size() == s.r) {
    Vec f(s.n);
    f.head(s.r) = X;
    double acc = 0.0;
    for (int i = 0; i < s.r; ++i) acc += psi[i] * X(i);
    f(s.n - 1) = -acc / psi[s.n - 1];
    return f;
  }
  require_dim(X.size(), s.n, "X");
  double acc = 0.0, mag = 0.0;
  for (int i = 0; i < s.n; ++i) {
    acc += psi[i] * X(i);
    mag += std::abs(psi[i] * X(i));
  }
  if (std::abs(acc) > 1e-10 * std::max(1.0, mag))
    fail(ErrorCode::KernelViolation, "psi(X) must vanish when t = n");
  return X;
}

// Chart coordinates xi = (X_r, Y) of a translation.
inline Vec chart_xi(const WeylVector& psi, const TranslationParams& p) {
  const DomainShape s = make_domain(psi);
  const Vec fx = full_X(psi, s, p.X);
  require_dim(p.Y.size(), s.u, "Y");
  Vec xi(s.n - 1);
  xi.head(s.r) = fx.head(s.r);
  xi.tail(s.u) = p.Y;
  return xi;
}

inline TranslationParams params_from_xi(const WeylVector& psi, const Vec& xi) {
  const DomainShape s = make_domain(psi);
  require_dim(xi.size(), s.n - 1, "xi");
  return {xi.head(s.r), xi.tail(s.u)};
}

inline Mat translation_matrix(const WeylVector& psi, const TranslationParams& p) {
  const DomainShape s = make_domain(psi);
  const Vec X = full_X(psi, s, p.X);
  require_dim(p.Y.size(), s.u, "Y");
  const int n = s.n;
  Mat m = Mat::Identity(n + 1, n + 1);
  for (int i = 0; i < X.size(); ++i) m(i, i) = std::exp(X(i));
  if (s.full()) return m;
  double psiX = 0.0;
  for (int i = 0; i < s.t; ++i) psiX += psi[i] * X(i);
  const int z = s.z_index();
  for (int j = 0; j < s.u; ++j) {
    m(z, z + 1 + j) = p.Y(j);
    m(z + 1 + j, n) = p.Y(j);
  }
  m(z, n) = 0.5 * p.Y.squaredNorm() - psiX;
  return m;
}

inline Mat radial_flow_matrix(const WeylVector& psi, double s_) {
  const DomainShape s = make_domain(psi);
  Mat m = Mat::Identity(s.n + 1, s.n + 1);
  if (s.full()) {
    for (int i = 0; i < s.n; ++i) m(i, i) = std::exp(-s_);
  } else {
    m(s.t, s.n) = -s_;
  }
  return m;
}

// Fixed center [e_{t+1}] of the flow.
inline ProjPoint flow_center(const WeylVector& psi) {
  const DomainShape s = make_domain(psi);
  return ProjPoint(Vec(Vec::Unit(s.n + 1, s.t)));
}

enum class OrthShape { LowRank, Corank1, Full };  // t < n-1, t = n-1, t = n

inline const char* to_string(OrthShape s) {
  switch (s) {
    case OrthShape::LowRank: return "t<n-1";
    case OrthShape::Corank1: return "t=n-1";
    case OrthShape::Full: return "t=n";
  }
  return "?";
}

// Element of O(psi): a permutation of the first t coordinates preserving psi,
// identity on z, an orthogonal block on y.
struct OrthDescriptor {
  std::vector<int> perm;  // perm[i] = sigma(i); P e_i = e_{sigma(i)}
  Mat block;              // u x u
  OrthShape shape = OrthShape::LowRank;

  bool is_identity(double tol = 1e-10) const {
    for (std::size_t i = 0; i < perm.size(); ++i)
      if (perm[i] != int(i)) return false;
    return block.size() == 0 || (block - Mat::Identity(block.rows(), block.cols())).norm() <= tol;
  }
};

inline OrthShape orth_shape(const DomainShape& s) {
  if (s.full()) return OrthShape::Full;
  return s.t == s.n - 1 ? OrthShape::Corank1 : OrthShape::LowRank;
}

inline OrthDescriptor orth_identity(const WeylVector& psi) {
  const DomainShape s = make_domain(psi);
  OrthDescriptor o;
  o.perm.resize(s.t);
  for (int i = 0; i < s.t; ++i) o.perm[i] = i;
  o.block = Mat::Identity(s.u, s.u);
  o.shape = orth_shape(s);
  return o;
}

inline void validate_orth(const WeylVector& psi, const OrthDescriptor& o) {
  const DomainShape s = make_domain(psi);
  require_dim(Eigen::Index(o.perm.size()), s.t, "permutation");
  std::vector<bool> seen(s.t, false);
  for (int i = 0; i < s.t; ++i) {
    const int j = o.perm[i];
    if (j < 0 || j >= s.t || seen[j]) fail(ErrorCode::InvalidArgument, "not a permutation");
    seen[j] = true;
    if (!psi.equal(i, j)) fail(ErrorCode::InvalidArgument, "permutation does not preserve psi");
  }
  require_dim(o.block.rows(), s.u, "orthogonal block");
  require_dim(o.block.cols(), s.u, "orthogonal block");
  if (s.u > 0 && (o.block.transpose() * o.block - Mat::Identity(s.u, s.u)).norm() > 1e-10)
    fail(ErrorCode::InvalidArgument, "block is not orthogonal");
}

inline Mat orth_matrix(const WeylVector& psi, const OrthDescriptor& o) {
  const DomainShape s = make_domain(psi);
  validate_orth(psi, o);
  Mat m = Mat::Zero(s.n + 1, s.n + 1);
  for (int i = 0; i < s.t; ++i) m(o.perm[i], i) = 1.0;
  if (!s.full()) {
    m(s.t, s.t) = 1.0;
    m.block(s.t + 1, s.t + 1, s.u, s.u) = o.block;
  }
  m(s.n, s.n) = 1.0;
  return m;
}

inline OrthDescriptor compose(const OrthDescriptor& a, const OrthDescriptor& b) {
  OrthDescriptor c = a;
  for (std::size_t i = 0; i < b.perm.size(); ++i) c.perm[i] = a.perm[b.perm[i]];
  c.block = a.block * b.block;
  return c;
}

inline OrthDescriptor inverse(const OrthDescriptor& a) {
  OrthDescriptor c = a;
  for (std::size_t i = 0; i < a.perm.size(); ++i) c.perm[a.perm[i]] = int(i);
  c.block = a.block.transpose();
  return c;
}

inline Mat plane_rotation(int u, double angle) {
  Mat b = Mat::Identity(u, u);
  if (u >= 2) {
    b(0, 0) = std::cos(angle);
    b(0, 1) = -std::sin(angle);
    b(1, 0) = std::sin(angle);
    b(1, 1) = std::cos(angle);
  }
  return b;
}

struct OrthStructure {
  std::vector<OrthDescriptor> generators;
  long long permutation_order = 1;  // |S(psi)|
  int u = 0;                        // O(u) factor
  bool finite() const { return u <= 1; }
  long long order() const { return finite() ? permutation_order * (u == 1 ? 2 : 1) : 0; }
  std::string description() const {
    std::string parts;
    if (permutation_order > 1) parts = "S(psi) of order " + std::to_string(permutation_order);
    if (u >= 1) {
      if (!parts.empty()) parts += " x ";
      parts += "O(" + std::to_string(u) + ")";
    }
    return parts.empty() ? "trivial" : parts;
  }
};

// Angle used by the rotation generator; any irrational multiple of pi works.
inline constexpr double kRotationSlot = 1.0;

inline OrthStructure orth_generators(const WeylVector& psi) {
  const DomainShape s = make_domain(psi);
  OrthStructure out;
  out.u = s.u;
  long long run = 1;
  for (int i = 0; i + 1 < s.t; ++i) {
    if (psi.equal(i, i + 1)) {
      OrthDescriptor g = orth_identity(psi);
      std::swap(g.perm[i], g.perm[i + 1]);
      out.generators.push_back(g);
      ++run;
      out.permutation_order *= run;
    } else {
      run = 1;
    }
  }
  if (s.u >= 1) {
    OrthDescriptor refl = orth_identity(psi);
    refl.block(0, 0) = -1.0;
    out.generators.push_back(refl);
  }
  if (s.u >= 2) {
    OrthDescriptor rot = orth_identity(psi);
    rot.block = plane_rotation(s.u, kRotationSlot);
    out.generators.push_back(rot);
    for (int j = 0; j + 1 < s.u; ++j) {
      OrthDescriptor sw = orth_identity(psi);
      sw.block.setZero();
      for (int k = 0; k < s.u; ++k) sw.block(k, k) = 1.0;
      sw.block(j, j) = sw.block(j + 1, j + 1) = 0.0;
      sw.block(j, j + 1) = sw.block(j + 1, j) = 1.0;
      out.generators.push_back(sw);
    }
  }
  return out;
}

// Every permutation of the first t coordinates preserving psi.
inline std::vector<std::vector<int>> psi_permutations(const WeylVector& psi) {
  const DomainShape s = make_domain(psi);
  std::vector<int> p(s.t);
  for (int i = 0; i < s.t; ++i) p[i] = i;
  std::vector<std::vector<int>> out;
  do {
    bool ok = true;
    for (int i = 0; i < s.t && ok; ++i) ok = psi.equal(i, p[i]);
    if (ok) out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

// All elements of O(psi) when it is finite (u <= 1).
inline std::vector<OrthDescriptor> orth_elements(const WeylVector& psi) {
  const DomainShape s = make_domain(psi);
  if (s.u >= 2) fail(ErrorCode::UnsupportedPsi, "O(psi) is infinite");
  std::vector<OrthDescriptor> out;
  for (const auto& p : psi_permutations(psi)) {
    for (int sign : {1, -1}) {
      if (sign < 0 && s.u == 0) continue;
      OrthDescriptor o = orth_identity(psi);
      o.perm = p;
      if (s.u == 1) o.block(0, 0) = sign;
      out.push_back(o);
    }
  }
  return out;
}

inline Mat haar_orthogonal(int k, std::mt19937_64& rng) {
  if (k == 0) return Mat(0, 0);
  std::normal_distribution<double> nd;
  Mat g(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) g(i, j) = nd(rng);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < k; ++i)
    if (r(i, i) < 0) q.col(i) = -q.col(i);
  return q;
}

inline OrthDescriptor sample_orth(const WeylVector& psi, std::mt19937_64& rng) {
  const DomainShape s = make_domain(psi);
  OrthDescriptor o = orth_identity(psi);
  int i = 0;
  while (i < s.t) {
    int j = i + 1;
    while (j < s.t && psi.equal(i, j)) ++j;
    std::vector<int> seg(o.perm.begin() + i, o.perm.begin() + j);
    std::shuffle(seg.begin(), seg.end(), rng);
    std::copy(seg.begin(), seg.end(), o.perm.begin() + i);
    i = j;
  }
  o.block = haar_orthogonal(s.u, rng);
  return o;
}

// Matrix tagged with Phi_s * m*(X, Y) * o when known.
struct Factorization {
  double s = 0.0;
  TranslationParams params;
  OrthDescriptor orth;
};

struct GroupElement {
  Mat matrix;
  std::optional<Factorization> factors;
};

inline Mat element_matrix(const WeylVector& psi, const Factorization& f) {
  return radial_flow_matrix(psi, f.s) * translation_matrix(psi, f.params) * orth_matrix(psi, f.orth);
}

inline GroupElement make_element(const WeylVector& psi, const Factorization& f) {
  return {element_matrix(psi, f), f};
}

inline GroupElement translation(const WeylVector& psi, const TranslationParams& p) {
  const DomainShape s = make_domain(psi);
  TranslationParams q{full_X(psi, s, p.X), p.Y};
  return {translation_matrix(psi, q), Factorization{0.0, q, orth_identity(psi)}};
}

inline GroupElement radial_flow(const WeylVector& psi, double s) {
  const DomainShape sh = make_domain(psi);
  TranslationParams zero{Vec::Zero(sh.full() ? sh.n : sh.r), Vec::Zero(sh.u)};
  return {radial_flow_matrix(psi, s), Factorization{s, zero, orth_identity(psi)}};
}

struct EnlargedResult {
  GroupElement element;
  double psi_star = 0.0;
};

// m_t(X, Z, Y) = exp Psi_t(X, Z, Y). X has length t. Z is ignored when t = n.
inline EnlargedResult enlarged(const WeylVector& psi, const Vec& X, double Z, const Vec& Y) {
  const DomainShape s = make_domain(psi);
  require_dim(X.size(), s.t, "X");
  require_dim(Y.size(), s.u, "Y");
  const int n = s.n;
  Mat m = Mat::Identity(n + 1, n + 1);
  for (int i = 0; i < s.t; ++i) m(i, i) = std::exp(X(i));
  double psiX = 0.0;
  for (int i = 0; i < s.t; ++i) psiX += psi[i] * X(i);
  if (s.full()) return {{m, std::nullopt}, psiX / psi.sum()};
  const int z = s.t;
  for (int j = 0; j < s.u; ++j) {
    m(z, z + 1 + j) = Y(j);
    m(z + 1 + j, n) = Y(j);
  }
  m(z, n) = Z + 0.5 * Y.squaredNorm();
  return {{m, std::nullopt}, psiX + Z};
}

// Point Phi_level(m*(X, Y) b); h of the result equals level.
inline Vec horosphere_point(const WeylVector& psi, const Vec& X, const Vec& Y, double level) {
  const Mat m = radial_flow_matrix(psi, level) * translation_matrix(psi, {X, Y});
  return act_affine(m, basepoint(psi));
}

struct Decomposition {
  double s = 0.0;
  TranslationParams params;
  OrthDescriptor orth;
  double residual = 0.0;
};

// g = c * Phi_s * m*(X, Y) * o.
inline Decomposition semidirect_decompose(const WeylVector& psi, const Mat& g_in) {
  const DomainShape s = make_domain(psi);
  const int n = s.n;
  require_dim(g_in.rows(), n + 1, "element");
  require_dim(g_in.cols(), n + 1, "element");
  if (!g_in.allFinite() || g_in(n, n) == 0.0) fail(ErrorCode::NotInGroup, "bottom corner vanishes");
  const Mat g = g_in / g_in(n, n);
  const double tol = settings().group_residual * std::max(1.0, g.norm());

  Decomposition d;
  d.orth = orth_identity(psi);
  Vec logdiag(s.t);
  for (int i = 0; i < s.t; ++i) {
    Eigen::Index j;
    g.row(i).head(s.t).cwiseAbs().maxCoeff(&j);
    if (!(g(i, j) > 0.0)) fail(ErrorCode::NotInGroup, "hyperbolic row is not positive");
    d.orth.perm[j] = i;
    logdiag(i) = std::log(g(i, j));
  }
  {
    std::vector<int> sorted(d.orth.perm);
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < s.t; ++i)
      if (sorted[i] != i) fail(ErrorCode::NotInGroup, "hyperbolic block is not monomial");
    for (int i = 0; i < s.t; ++i)
      if (!psi.equal(i, d.orth.perm[i])) fail(ErrorCode::NotInGroup, "permutation does not preserve psi");
  }

  if (s.full()) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += psi[i] * logdiag(i);
    d.s = -acc / psi.sum();
    Vec X = logdiag.array() + d.s;
    d.params = {X, Vec::Zero(0)};
  } else {
    const int z = s.t;
    Mat B = g.block(z + 1, z + 1, s.u, s.u);
    if (s.u > 0 && (B.transpose() * B - Mat::Identity(s.u, s.u)).norm() > settings().group_residual * 10)
      fail(ErrorCode::NotInGroup, "parabolic block is not orthogonal");
    d.orth.block = B;
    Vec Y = g.block(z + 1, n, s.u, 1);
    double psiX = 0.0;
    for (int i = 0; i < s.t; ++i) psiX += psi[i] * logdiag(i);
    const double corner = 0.5 * Y.squaredNorm() - psiX;
    d.s = corner - g(z, n);
    d.params = {logdiag, Y};
  }
  const Mat rec = radial_flow_matrix(psi, d.s) * translation_matrix(psi, d.params) * [&] {
    Mat m = Mat::Zero(n + 1, n + 1);
    for (int i = 0; i < s.t; ++i) m(d.orth.perm[i], i) = 1.0;
    if (!s.full()) {
      m(s.t, s.t) = 1.0;
      m.block(s.t + 1, s.t + 1, s.u, s.u) = d.orth.block;
    }
    m(n, n) = 1.0;
    return m;
  }();
  d.residual = (rec - g).norm();
  if (d.residual > tol) fail(ErrorCode::NotInGroup, "residual " + std::to_string(d.residual));
  return d;
}

enum class ElementKind { Elliptic, Parabolic, Hyperbolic };

struct ElementClass {
  ElementKind kind = ElementKind::Elliptic;
  bool standard = false;  // meaningful for Parabolic
};

inline const char* to_string(ElementKind k) {
  switch (k) {
    case ElementKind::Elliptic: return "Elliptic";
    case ElementKind::Parabolic: return "Parabolic";
    case ElementKind::Hyperbolic: return "Hyperbolic";
  }
  return "?";
}

inline ElementClass classify_element(const ProjMap& gm) {
  const Mat& g0 = gm.matrix();
  const double det = g0.fullPivLu().determinant();
  if (det == 0.0) fail(ErrorCode::Singular, "element is singular");
  const Mat g = g0 / std::pow(std::abs(det), 1.0 / double(g0.rows()));
  const auto clusters = jordan_structure(g);
  double lo = kInf, hi = 0.0;
  for (const auto& c : clusters) {
    lo = std::min(lo, std::abs(c.value));
    hi = std::max(hi, std::abs(c.value));
  }
  if (std::log(hi / lo) > 1e-4) return {ElementKind::Hyperbolic, false};
  int big = 0, threes = 0;
  bool others_trivial = true;
  for (const auto& c : clusters) {
    for (int b : c.block_sizes) {
      big = std::max(big, b);
      if (b == 3) ++threes;
      else if (b != 1) others_trivial = false;
    }
  }
  if (big <= 1) return {ElementKind::Elliptic, false};
  return {ElementKind::Parabolic, threes == 1 && others_trivial};
}

struct SubgroupFlags {
  bool in_T1 = false, in_T2 = false, in_P = false;
  std::vector<double> weights;  // t + 1 values
};

inline SubgroupFlags subgroup_membership(const WeylVector& psi, const Mat& g) {
  const DomainShape s = make_domain(psi);
  const Decomposition d = semidirect_decompose(psi, g);
  const double tol = 1e-9;
  if (std::abs(d.s) > tol || !d.orth.is_identity(1e-9))
    fail(ErrorCode::NotInGroup, "element is not a translation");
  SubgroupFlags f;
  const Vec& X = d.params.X;
  const Vec& Y = d.params.Y;
  const bool x0 = X.size() == 0 || X.cwiseAbs().maxCoeff() <= tol;
  const bool y0 = Y.size() == 0 || Y.cwiseAbs().maxCoeff() <= tol;
  double psiX = 0.0;
  for (int i = 0; i < s.t; ++i) psiX += psi[i] * X(i);
  f.in_P = x0;
  f.in_T2 = y0;
  f.in_T1 = y0 && (s.full() || std::abs(psiX) <= tol);
  for (int i = 0; i < s.t; ++i) f.weights.push_back(std::exp(X(i)));
  f.weights.push_back(1.0);
  return f;
}

// theta(x, z, y) = (x, z + psi(log x), y); defined for t < n.
inline Vec straighten(const WeylVector& psi, const Vec& p) {
  const DomainShape s = make_domain(psi);
  if (s.full()) fail(ErrorCode::UnsupportedBranch, "straightening needs t < n");
  require_chart(s, p);
  Vec q = p;
  for (int i = 0; i < s.t; ++i) q(s.t) += psi[i] * std::log(p(i));
  return q;
}

}  // namespace gcusp
