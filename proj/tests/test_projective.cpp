#include <gtest/gtest.h>

#include <random>

#include "gcusp/groups.hpp"
#include "gcusp/projective.hpp"

using namespace gcusp;

namespace {

Vec v3(double a, double b, double c) { return (Vec(3) << a, b, c).finished(); }

}  // namespace

TEST(ProjPoint, CanonicalFinite) {
  ProjPoint p(v3(2, 4, 2));
  EXPECT_DOUBLE_EQ(p.coords()(0), 1.0);
  EXPECT_DOUBLE_EQ(p.coords()(1), 2.0);
  EXPECT_DOUBLE_EQ(p.coords()(2), 1.0);
}

TEST(ProjPoint, CanonicalAtInfinity) {
  ProjPoint p(v3(-3, 4, 0));
  EXPECT_NEAR(p.coords()(0), 0.6, 1e-15);
  EXPECT_NEAR(p.coords()(1), -0.8, 1e-15);
  EXPECT_TRUE(p.at_infinity());
}

TEST(ProjPoint, ZeroRejected) { EXPECT_THROW(ProjPoint(v3(0, 0, 0)), Error); }

TEST(ProjPoint, CanonicalizationIdempotent) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 100; ++k) {
    Vec v(4);
    for (int i = 0; i < 4; ++i) v(i) = nd(rng);
    if (k % 3 == 0) v(3) = 0.0;
    ProjPoint p(v);
    ProjPoint q(p.coords());
    EXPECT_LE((p.coords() - q.coords()).norm(), 1e-15);
  }
}

TEST(ToAffine, Examples) {
  Vec a = to_affine(ProjPoint(v3(2, 4, 2)));
  EXPECT_DOUBLE_EQ(a(0), 1.0);
  EXPECT_DOUBLE_EQ(a(1), 2.0);
  Vec b = to_affine(ProjPoint(v3(3, -6, 3)));
  EXPECT_DOUBLE_EQ(b(0), 1.0);
  EXPECT_DOUBLE_EQ(b(1), -2.0);
  try {
    to_affine(ProjPoint(v3(1, 0, 0)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AtInfinity);
  }
}

TEST(ApplyMap, Identity) {
  ProjPoint p(v3(0.3, -2, 1));
  ProjPoint q = apply_map(ProjMap(Mat::Identity(3, 3)), p);
  EXPECT_LE((p.coords() - q.coords()).norm(), 0.0);
}

TEST(ApplyMap, ScalarInvariance) {
  ProjPoint q = apply_map(ProjMap(2 * Mat::Identity(3, 3)), ProjPoint(v3(1, 0, 1)));
  EXPECT_EQ(q.coords(), v3(1, 0, 1));
}

TEST(ApplyMap, FlowMatrixOnOrigin) {
  // Phi_s shifts z by -s; its inverse Phi_{-1} sends the origin to z = 1.
  const WeylVector psi({0.0, 0.0});
  ProjPoint o(v3(0, 0, 1));
  ProjPoint fwd = apply_map(ProjMap(radial_flow_matrix(psi, 1.0)), o);
  ProjPoint back = apply_map(ProjMap(radial_flow_matrix(psi, -1.0)), o);
  EXPECT_EQ(fwd.coords(), v3(-1, 0, 1));
  EXPECT_EQ(back.coords(), v3(1, 0, 1));
}

TEST(ApplyMap, Composition) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 200; ++k) {
    Mat a(4, 4), b(4, 4);
    Vec v(4);
    for (int i = 0; i < 4; ++i) {
      v(i) = nd(rng);
      for (int j = 0; j < 4; ++j) a(i, j) = nd(rng), b(i, j) = nd(rng);
    }
    ProjMap ma(a), mb(b);
    ProjPoint p(v);
    ProjPoint lhs = apply_map(mb, apply_map(ma, p));
    ProjPoint rhs = apply_map(mb * ma, p);
    const double scale = std::max(1.0, lhs.coords().norm());
    EXPECT_LE((lhs.coords() - rhs.coords()).norm(), 1e-10 * scale * 1e3);
  }
}

TEST(ProjMap, SingularRejected) {
  Mat m = Mat::Identity(3, 3);
  m(2, 2) = 0;
  try {
    ProjMap pm(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Singular);
  }
}

TEST(TriExpLog, LogIdentityIsZero) { EXPECT_EQ(tri_log(Mat::Identity(4, 4)), Mat::Zero(4, 4)); }

TEST(TriExpLog, NilpotentExponential) {
  // Psi_0(Y = 1, Z = 0) in n = 2
  Mat a = Mat::Zero(3, 3);
  a(0, 1) = 1.0;
  a(1, 2) = 1.0;
  Mat e = tri_exp(a);
  Mat want(3, 3);
  want << 1, 1, 0.5, 0, 1, 1, 0, 0, 1;
  EXPECT_EQ(e, want);
}

TEST(TriExpLog, DiagonalLog) {
  Mat m = Mat::Identity(2, 2);
  m(0, 0) = std::exp(1.0);
  Mat l = tri_log(m);
  EXPECT_NEAR(l(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(l(1, 1), 0.0, 1e-15);
  EXPECT_NEAR(l(0, 1), 0.0, 1e-15);
}

TEST(TriExpLog, RejectsNonPositive) {
  Mat m = Mat::Identity(2, 2);
  m(1, 1) = -1;
  try {
    tri_log(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveDiagonal);
  }
}

TEST(TriExpLog, RoundTrip) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 100; ++k) {
    const int n = 2 + int(k % 4);
    Mat a = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) a(i, j) = nd(rng) * (i == j ? 0.7 : 1.0);
    if (k % 5 == 0) a.diagonal().setConstant(a(0, 0));
    Mat m = tri_exp(a);
    Mat back = tri_exp(tri_log(m));
    EXPECT_LE((back - m).norm(), 1e-10 * m.norm()) << k;
    EXPECT_LE((tri_log(m) - a).norm(), 1e-9 * std::max(1.0, a.norm())) << k;
  }
}
