#include <gtest/gtest.h>

#include <random>

#include "gcusp/groups.hpp"
#include "oracles.hpp"

using namespace gcusp;

namespace {

const double E = std::exp(1.0);

Vec vec(std::initializer_list<double> xs) {
  Vec v(xs.size());
  int i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

// Random point of V_psi with h in [-3, -0.05].
Vec random_interior(const WeylVector& psi, std::mt19937_64& rng) {
  const DomainShape s = make_domain(psi);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Vec X(s.r), Y(s.u);
  for (int i = 0; i < s.r; ++i) X(i) = U(rng);
  for (int i = 0; i < s.u; ++i) Y(i) = 2 * U(rng);
  const double level = -0.05 - 1.5 * (U(rng) + 1.0);
  return horosphere_point(psi, X, Y, level);
}

}  // namespace

TEST(WeylVector, RejectsUnsorted) {
  try {
    WeylVector({1.0, 2.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsortedWeyl);
  }
}

TEST(WeylVector, RejectsNegative) {
  try {
    WeylVector({1.0, -1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NegativeWeyl);
  }
}

TEST(WeylVector, ExactTies) {
  WeylVector q(std::vector<Rational>{make_rational(1, 3), make_rational(2, 6), make_rational(0, 1)});
  EXPECT_TRUE(q.equal(0, 1));
  EXPECT_FALSE(q.equal(1, 2));
}

TEST(MakeDomain, Examples) {
  auto a = make_domain(WeylVector({0.0, 0.0, 0.0}));
  EXPECT_EQ(a.t, 0);
  EXPECT_EQ(a.r, 0);
  EXPECT_EQ(a.u, 2);
  auto b = make_domain(WeylVector({1.0, 0.0, 0.0}));
  EXPECT_EQ(b.t, 1);
  EXPECT_EQ(b.r, 1);
  EXPECT_EQ(b.u, 1);
  auto c = make_domain(WeylVector({1.0, 1.0, 1.0}));
  EXPECT_EQ(c.t, 3);
  EXPECT_EQ(c.r, 2);
  EXPECT_EQ(c.u, 0);
}

TEST(MakeDomain, RankIdentity) {
  for (int n = 2; n <= 6; ++n)
    for (int t = 0; t <= n; ++t) {
      std::vector<double> c(n, 0.0);
      for (int i = 0; i < t; ++i) c[i] = 1.0;
      auto s = make_domain(WeylVector(c));
      EXPECT_EQ(s.r + s.u, n - 1);
      EXPECT_EQ(s.t, t);
    }
}

TEST(Horofunction, Examples) {
  EXPECT_DOUBLE_EQ(horo(WeylVector({1.0, 1.0}), vec({1, 1})), 0.0);
  EXPECT_DOUBLE_EQ(horo(WeylVector({0.0, 0.0, 0.0}), vec({1, 1, 1})), 0.0);
  EXPECT_NEAR(horo(WeylVector({1.0, 1.0}), vec({E, E})), -1.0, 1e-15);
}

TEST(Horofunction, OutsideChart) {
  try {
    horo(WeylVector({1.0, 0.0}), vec({0.0, 1.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutsideChart);
  }
}

TEST(Horofunction, MatchesOracleAndDerivatives) {
  std::mt19937_64 rng(11);
  for (int n = 2; n <= 5; ++n)
    for (int regime = 0; regime < 4; ++regime) {
      const auto c = oracle::random_psi(n, regime, rng);
      const WeylVector psi(c);
      for (int k = 0; k < 100; ++k) {
        const Vec p = random_interior(psi, rng);
        const auto ev = horofunction(psi, p, 2);
        EXPECT_NEAR(ev.value, oracle::horo(c, p), 1e-12 * std::max(1.0, std::abs(ev.value)));
        auto f = [&](const Vec& q) { return oracle::horo(c, q); };
        const Vec fd = oracle::fd_gradient(f, p);
        EXPECT_LE((fd - *ev.gradient).norm(), 1e-6 * std::max(1.0, fd.norm()));
        auto grad = [&](const Vec& q) { return Vec(*horofunction(psi, q, 1).gradient); };
        const Mat fh = oracle::fd_jacobian(grad, p);
        EXPECT_LE((fh - *ev.hessian).norm(), 1e-6 * std::max(1.0, fh.norm()));
      }
    }
}

TEST(Horofunction, ConvexAlongChords) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 200; ++k) {
    const int n = 2 + int(k % 4);
    const WeylVector psi(oracle::random_psi(n, int(k % 4), rng));
    const Vec p = random_interior(psi, rng);
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = nd(rng);
    const auto ends = chord_endpoints(psi, p, v);
    const double a = -std::min(ends.t_minus, 5.0) * 0.99, b = std::min(ends.t_plus, 5.0) * 0.99;
    const int m = 40;
    const double hs = (b - a) / m;
    for (int i = 1; i < m; ++i) {
      const double s = a + i * hs;
      const double d2 = horo(psi, p + (s - hs) * v) - 2 * horo(psi, p + s * v) + horo(psi, p + (s + hs) * v);
      EXPECT_GE(d2, -1e-9);
    }
  }
}

TEST(Horofunction, HessianPositiveOnTangentSpace) {
  std::mt19937_64 rng(13);
  for (int n = 2; n <= 5; ++n)
    for (int regime = 0; regime < 4; ++regime) {
      const WeylVector psi(oracle::random_psi(n, regime, rng));
      for (int k = 0; k < 20; ++k) {
        const Vec p = random_interior(psi, rng);
        const auto ev = horofunction(psi, p, 2);
        const Vec g = *ev.gradient;
        // orthonormal basis of ker Dh
        Eigen::JacobiSVD<Mat> svd(g.transpose(), Eigen::ComputeFullV);
        const Mat K = svd.matrixV().rightCols(n - 1);
        Eigen::SelfAdjointEigenSolver<Mat> es(K.transpose() * *ev.hessian * K);
        EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
      }
    }
}

TEST(BoundaryHeight, Examples) {
  EXPECT_NEAR(boundary_height(WeylVector({1.0, 0.0}), vec({E}), Vec(0)), -1.0, 1e-15);
  const Vec bp = boundary_point(WeylVector({1.0, 0.0}), vec({E}), Vec(0));
  EXPECT_NEAR(bp(0), E, 0);
  EXPECT_NEAR(bp(1), -1.0, 1e-15);
  EXPECT_DOUBLE_EQ(boundary_height(WeylVector({0.0, 0.0}), Vec(0), vec({2})), 2.0);
  EXPECT_NEAR(boundary_height(WeylVector({2.0, 1.0}), vec({4}), Vec(0)), 1.0 / 16, 1e-16);
}

TEST(BoundaryHeight, GraphLiesOnBoundary) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  for (int n = 2; n <= 6; ++n)
    for (int regime = 0; regime < 4; ++regime) {
      const WeylVector psi(oracle::random_psi(n, regime, rng));
      const auto s = make_domain(psi);
      for (int k = 0; k < 50; ++k) {
        Vec x(s.r), y(s.u);
        for (int i = 0; i < s.r; ++i) x(i) = std::exp(U(rng));
        for (int i = 0; i < s.u; ++i) y(i) = U(rng);
        const Vec q = boundary_point(psi, x, y);
        EXPECT_LE(std::abs(horo(psi, q)), 1e-12 * std::max(1.0, q.norm()));
      }
    }
}

TEST(Membership, Examples) {
  const WeylVector psi({1.0, 1.0});
  EXPECT_EQ(membership(psi, vec({1, 1})), Membership::Boundary);
  EXPECT_EQ(membership(psi, vec({E, E})), Membership::Interior);
  EXPECT_EQ(membership(psi, vec({1, std::exp(-2.0)})), Membership::Exterior);
  EXPECT_EQ(membership(psi, vec({-1, 1})), Membership::OutsideChart);
}

TEST(HorospherePoint, Examples) {
  const WeylVector z({0.0, 0.0});
  const Vec b = horosphere_point(z, Vec(0), vec({0}), 0.0);
  EXPECT_EQ(b, basepoint(z));
  const Vec p = horosphere_point(z, Vec(0), vec({1}), 0.0);
  EXPECT_NEAR(p(0), 0.5, 1e-15);
  EXPECT_NEAR(p(1), 1.0, 1e-15);
  const Vec q = horosphere_point(WeylVector({1.0, 1.0}), vec({1}), Vec(0), 0.0);
  EXPECT_NEAR(q(0), E, 1e-14);
  EXPECT_NEAR(q(1), 1.0 / E, 1e-15);
}

TEST(HorospherePoint, LevelIsHorofunctionValue) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> U(-2, 2);
  for (int n = 2; n <= 6; ++n)
    for (int regime = 0; regime < 4; ++regime) {
      const WeylVector psi(oracle::random_psi(n, regime, rng));
      const auto s = make_domain(psi);
      for (int k = 0; k < 20; ++k) {
        Vec X(s.r), Y(s.u);
        for (int i = 0; i < s.r; ++i) X(i) = U(rng);
        for (int i = 0; i < s.u; ++i) Y(i) = U(rng);
        const double level = 3 * U(rng);
        EXPECT_NEAR(horo(psi, horosphere_point(psi, X, Y, level)), level, 1e-10);
      }
    }
}

TEST(ChordEndpoints, Examples) {
  const WeylVector z({0.0, 0.0});
  auto a = chord_endpoints(z, vec({1, 0}), vec({0, 1}));
  EXPECT_NEAR(a.t_minus, std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(a.t_plus, std::sqrt(2.0), 1e-14);
  auto b = chord_endpoints(z, vec({1, 0}), vec({1, 0}));
  EXPECT_NEAR(b.t_minus, 1.0, 1e-14);
  EXPECT_TRUE(std::isinf(b.t_plus));
  // Along the flow direction -p the ray exits through the boundary toward the
  // origin; backwards it escapes to the ideal boundary.
  const WeylVector o({1.0, 1.0});
  auto c = chord_endpoints(o, vec({E, E}), vec({-E, -E}));
  EXPECT_NEAR(c.t_plus, 1.0 - 1.0 / E, 1e-14);
  EXPECT_TRUE(std::isinf(c.t_minus));
}

TEST(ChordEndpoints, DegenerateDirection) {
  try {
    chord_endpoints(WeylVector({0.0, 0.0}), vec({1, 0}), vec({0, 0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateDirection);
  }
}

TEST(ChordEndpoints, MatchScanningOracle) {
  std::mt19937_64 rng(16);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 200; ++k) {
    const int n = 2 + int(k % 4);
    const auto c = oracle::random_psi(n, int(k % 4), rng);
    const WeylVector psi(c);
    const Vec p = random_interior(psi, rng);
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = nd(rng);
    const auto ends = chord_endpoints(psi, p, v);
    const double fwd = oracle::scan_chord(c, p, v), bwd = oracle::scan_chord(c, p, -v);
    for (auto [got, want] : {std::pair{ends.t_plus, fwd}, std::pair{ends.t_minus, bwd}}) {
      if (std::isinf(want)) {
        // the scan stops at 1e6; the solver may find a root beyond it
        EXPECT_TRUE(std::isinf(got) || got > 1e5) << got;
      } else {
        EXPECT_NEAR(got, want, 1e-10 * std::max(1.0, want));
      }
    }
  }
}

TEST(IdealBoundary, SimplexDescriptor) {
  const auto d = ideal_boundary(WeylVector({1.0, 1.0, 0.0}));
  EXPECT_EQ(d.dimension, 2);
  EXPECT_EQ(d.vertices.size(), 3u);
  const auto f = ideal_boundary(WeylVector({1.0, 1.0}));
  EXPECT_EQ(f.dimension, 1);
  EXPECT_EQ(f.center.coords(), vec({0, 0, 1}));
}

// Escaping sequences accumulate on the simplex spanned by e_1..e_{r+1}.
TEST(IdealBoundary, EscapingSequencesAccumulateOnSimplex) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int n = 2; n <= 5; ++n)
    for (int regime = 0; regime < 4; ++regime) {
      const WeylVector psi(oracle::random_psi(n, regime, rng));
      const auto s = make_domain(psi);
      const auto d = ideal_boundary(psi);
      Vec X(s.r), Y(s.u);
      for (int i = 0; i < s.r; ++i) X(i) = U(rng);
      for (int i = 0; i < s.u; ++i) Y(i) = U(rng);
      double prev = kInf;
      for (double depth : {1e2, 1e4, 1e6, 1e8}) {
        Vec p = s.full() ? Vec(std::exp(std::log(depth)) * boundary_point(psi, X.head(s.r).array().exp().matrix(), Y))
                         : Vec(horosphere_point(psi, X, Y, -depth));
        ProjPoint pp = ProjPoint::from_affine(p);
        // canonical unit representative
        Vec c = pp.coords() / pp.coords().norm();
        // distance to the cone over the simplex: coordinates beyond r+1 and
        // the homogeneous one vanish, the rest are nonnegative
        double dist = 0.0;
        for (int i = 0; i <= s.n; ++i) {
          if (i <= s.r) dist += std::pow(std::min(c(i), 0.0), 2);
          else dist += c(i) * c(i);
        }
        dist = std::sqrt(dist);
        EXPECT_LE(dist, prev + 1e-12);
        prev = dist;
      }
      EXPECT_LE(prev, 1e-3);
      EXPECT_EQ(int(d.vertices.size()), s.r + 1);
    }
}
