#include <gtest/gtest.h>

#include <random>

#include "gcusp/groups.hpp"
#include "oracles.hpp"

using namespace gcusp;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(xs.size());
  int i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

TranslationParams random_params(const WeylVector& psi, std::mt19937_64& rng, double scale = 1.0) {
  const DomainShape s = make_domain(psi);
  std::uniform_real_distribution<double> U(-scale, scale);
  Vec X(s.r), Y(s.u);
  for (int i = 0; i < s.r; ++i) X(i) = U(rng);
  for (int i = 0; i < s.u; ++i) Y(i) = U(rng);
  return {X, Y};
}

Vec random_interior(const WeylVector& psi, std::mt19937_64& rng) {
  const auto tp = random_params(psi, rng, 1.0);
  std::uniform_real_distribution<double> U(0.05, 3.0);
  return horosphere_point(psi, tp.X, tp.Y, -U(rng));
}

struct Regimes {
  std::vector<WeylVector> all;
  Regimes() {
    std::mt19937_64 rng(99);
    for (int n = 2; n <= 6; ++n)
      for (int regime = 0; regime < 4; ++regime) all.emplace_back(oracle::random_psi(n, regime, rng));
    all.push_back(WeylVector({2.0, 1.0, 1.0}));
    all.push_back(WeylVector({1.0, 1.0, 0.0, 0.0}));
    all.push_back(WeylVector({1.0, 1.0, 1.0}));
  }
};

}  // namespace

TEST(Translation, IdentityAtZero) {
  const WeylVector psi({1.0, 0.0, 0.0});
  EXPECT_EQ(translation(psi, {vec({0}), vec({0})}).matrix, Mat::Identity(4, 4));
}

TEST(Translation, CornerEntryDim3) {
  const WeylVector psi({1.0, 0.0, 0.0});
  const double x1 = 0.7, y1 = -1.3;
  const Mat m = translation(psi, {vec({x1}), vec({y1})}).matrix;
  // 1-based (2,4): row of z, homogeneous column
  EXPECT_NEAR(m(1, 3), 0.5 * y1 * y1 - x1, 1e-15);
  EXPECT_NEAR(m(0, 0), std::exp(x1), 0);
  EXPECT_EQ(m(1, 2), y1);
  EXPECT_EQ(m(2, 3), y1);
}

TEST(Translation, KernelViolation) {
  try {
    translation(WeylVector({1.0, 1.0}), {vec({1, 1}), Vec(0)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::KernelViolation);
  }
}

TEST(Translation, AbelianGroupLaw) {
  std::mt19937_64 rng(1);
  for (const auto& psi : Regimes().all) {
    for (int k = 0; k < 10; ++k) {
      const auto a = random_params(psi, rng), b = random_params(psi, rng);
      const Mat lhs = translation(psi, a).matrix * translation(psi, b).matrix;
      const Mat rhs = translation(psi, {a.X + b.X, a.Y + b.Y}).matrix;
      EXPECT_LE((lhs - rhs).norm(), 1e-12 * lhs.norm());
    }
  }
}

TEST(Enlarged, Examples) {
  auto a = enlarged(WeylVector({1.0, 0.0}), vec({2}), -2.0, Vec(0));
  EXPECT_DOUBLE_EQ(a.psi_star, 0.0);
  // psi_* = 0 means the element lies in T(psi)
  EXPECT_NO_THROW(subgroup_membership(WeylVector({1.0, 0.0}), a.element.matrix));
  auto b = enlarged(WeylVector({1.0, 0.0, 0.0}), vec({0}), 0.0, vec({0}));
  EXPECT_EQ(b.element.matrix, Mat::Identity(4, 4));
  EXPECT_EQ(b.psi_star, 0.0);
  auto c = enlarged(WeylVector({1.0, 1.0}), vec({1, -1}), 0.0, Vec(0));
  EXPECT_DOUBLE_EQ(c.psi_star, 0.0);
}

TEST(Enlarged, Cocycle) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(-1, 1);
  for (const auto& psi : Regimes().all) {
    const auto s = make_domain(psi);
    for (int k = 0; k < 20; ++k) {
      Vec X(s.t), Y(s.u);
      for (int i = 0; i < s.t; ++i) X(i) = U(rng);
      for (int i = 0; i < s.u; ++i) Y(i) = U(rng);
      const auto e = enlarged(psi, X, U(rng), Y);
      const Vec p = random_interior(psi, rng);
      EXPECT_NEAR(horo(psi, act_affine(e.element.matrix, p)), horo(psi, p) - e.psi_star, 1e-9);
    }
  }
}

TEST(RadialFlow, Examples) {
  const WeylVector psi({1.0, 0.0, 0.0});
  EXPECT_EQ(radial_flow(psi, 0.0).matrix, Mat::Identity(4, 4));
  const Mat a = radial_flow(psi, 0.3).matrix * radial_flow(psi, 1.1).matrix;
  EXPECT_LE((a - radial_flow(psi, 1.4).matrix).norm(), 1e-15);
  EXPECT_EQ(flow_center(psi).coords(), vec({0, 1, 0, 0}));
  const WeylVector full({1.0, 1.0});
  const Mat b = radial_flow(full, 0.3).matrix * radial_flow(full, 1.1).matrix;
  EXPECT_LE((b - radial_flow(full, 1.4).matrix).norm(), 1e-15);
}

TEST(RadialFlow, EquivarianceAndCentralization) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-3, 3);
  for (const auto& psi : Regimes().all) {
    for (int k = 0; k < 20; ++k) {
      const Vec p = random_interior(psi, rng);
      const double s = U(rng);
      EXPECT_NEAR(horo(psi, act_affine(radial_flow_matrix(psi, s), p)), horo(psi, p) + s, 1e-10);
      const Mat m = translation(psi, random_params(psi, rng)).matrix;
      const Mat f = radial_flow_matrix(psi, s);
      EXPECT_LE((m * f - f * m).norm(), 1e-10 * m.norm());
    }
  }
}

TEST(TranslationGroup, PreservesHorofunctionAndHasPositiveSpectrum) {
  std::mt19937_64 rng(4);
  for (const auto& psi : Regimes().all) {
    for (int k = 0; k < 25; ++k) {
      const Mat m = translation(psi, random_params(psi, rng)).matrix;
      const Vec p = random_interior(psi, rng);
      EXPECT_NEAR(horo(psi, act_affine(m, p)), horo(psi, p), 1e-9);
      Eigen::EigenSolver<Mat> es(m, false);
      for (int i = 0; i < es.eigenvalues().size(); ++i) {
        EXPECT_GT(es.eigenvalues()(i).real(), 0.0);
        EXPECT_LE(std::abs(es.eigenvalues()(i).imag()), 1e-6);
      }
    }
  }
}

TEST(OrthGenerators, StructureExamples) {
  const auto a = orth_generators(WeylVector({0.0, 0.0, 0.0}));
  EXPECT_EQ(a.u, 2);
  EXPECT_FALSE(a.finite());
  EXPECT_EQ(a.description(), "O(2)");
  const auto b = orth_generators(WeylVector({2.0, 1.0, 1.0}));
  EXPECT_EQ(b.order(), 2);
  ASSERT_EQ(b.generators.size(), 1u);
  EXPECT_EQ(b.generators[0].perm, (std::vector<int>{0, 2, 1}));
  const auto c = orth_generators(WeylVector({3.0, 2.0, 1.0}));
  EXPECT_EQ(c.order(), 1);
  EXPECT_TRUE(c.generators.empty());
  EXPECT_EQ(c.description(), "trivial");
  EXPECT_EQ(orth_generators(WeylVector({1.0, 1.0, 1.0})).order(), 6);
  EXPECT_EQ(orth_elements(WeylVector({1.0, 1.0, 1.0})).size(), 6u);
  EXPECT_EQ(orth_elements(WeylVector({1.0, 0.0, 0.0})).size(), 2u);
}

TEST(OrthGenerators, FixBasepointAndPreserveH) {
  std::mt19937_64 rng(5);
  for (const auto& psi : Regimes().all) {
    auto gens = orth_generators(psi).generators;
    for (int k = 0; k < 5; ++k) gens.push_back(sample_orth(psi, rng));
    for (const auto& g : gens) {
      const Mat m = orth_matrix(psi, g);
      const Vec b = basepoint(psi);
      EXPECT_LE((act_affine(m, b) - b).norm(), 1e-14);
      const Vec p = random_interior(psi, rng);
      EXPECT_NEAR(horo(psi, act_affine(m, p)), horo(psi, p), 1e-10);
    }
  }
}

TEST(OrthGenerators, MatrixShapes) {
  // t < n-1, t = n-1, t = n
  const Mat a = orth_matrix(WeylVector({1.0, 0.0, 0.0}), orth_generators(WeylVector({1.0, 0.0, 0.0})).generators[0]);
  Mat wa = Mat::Identity(4, 4);
  wa(2, 2) = -1;
  EXPECT_EQ(a, wa);
  const WeylVector b({1.0, 1.0, 0.0});
  const Mat mb = orth_matrix(b, orth_generators(b).generators[0]);
  Mat wb = Mat::Zero(4, 4);
  wb(1, 0) = wb(0, 1) = wb(2, 2) = wb(3, 3) = 1;
  EXPECT_EQ(mb, wb);
  EXPECT_EQ(orth_generators(b).generators[0].shape, OrthShape::Corank1);
  const WeylVector c({1.0, 1.0});
  EXPECT_EQ(orth_generators(c).generators[0].shape, OrthShape::Full);
}

TEST(SemidirectDecompose, Examples) {
  const WeylVector psi({1.0, 0.0, 0.0});
  const auto id = semidirect_decompose(psi, Mat::Identity(4, 4));
  EXPECT_EQ(id.s, 0.0);
  EXPECT_LE(id.params.X.norm() + id.params.Y.norm(), 0.0);
  EXPECT_TRUE(id.orth.is_identity());
  const TranslationParams tp{vec({0.4}), vec({-0.9, 1.2}).head(1)};
  const auto d = semidirect_decompose(psi, radial_flow_matrix(psi, 2.0) * translation_matrix(psi, tp));
  EXPECT_NEAR(d.s, 2.0, 1e-12);
  EXPECT_NEAR(d.params.X(0), 0.4, 1e-12);
  EXPECT_NEAR(d.params.Y(0), -0.9, 1e-12);
}

TEST(SemidirectDecompose, RoundTrip) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> U(-2, 2);
  for (const auto& psi : Regimes().all) {
    const auto s = make_domain(psi);
    for (int k = 0; k < 20; ++k) {
      Factorization f{U(rng), random_params(psi, rng), sample_orth(psi, rng)};
      f.params.X = full_X(psi, s, f.params.X);
      const Mat g = element_matrix(psi, f) * (k % 2 ? -2.5 : 1.0);
      const auto d = semidirect_decompose(psi, g);
      EXPECT_NEAR(d.s, f.s, 1e-9);
      EXPECT_LE((d.params.X - f.params.X).norm(), 1e-9);
      EXPECT_LE((d.params.Y - f.params.Y).norm(), 1e-9);
      EXPECT_EQ(d.orth.perm, f.orth.perm);
      EXPECT_LE((d.orth.block - f.orth.block).norm(), 1e-9);
    }
  }
}

TEST(SemidirectDecompose, RejectsForeignElements) {
  const WeylVector psi({3.0, 2.0, 1.0});
  Mat g = Mat::Identity(4, 4);
  g(0, 1) = 0.5;
  try {
    semidirect_decompose(psi, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotInGroup);
  }
  // swapping unequal psi coordinates is not in O(psi)
  Mat p = Mat::Zero(4, 4);
  p(0, 1) = p(1, 0) = p(2, 2) = p(3, 3) = 1;
  EXPECT_THROW(semidirect_decompose(psi, p), Error);
}

TEST(ClassifyElement, Examples) {
  EXPECT_EQ(classify_element(ProjMap(Mat::Identity(4, 4))).kind, ElementKind::Elliptic);
  const WeylVector psi({1.0, 0.0, 0.0});
  const auto c = classify_element(ProjMap(translation_matrix(psi, {vec({0}), vec({0.8})})));
  EXPECT_EQ(c.kind, ElementKind::Parabolic);
  EXPECT_TRUE(c.standard);
  Mat d = Mat::Zero(3, 3);
  d.diagonal() << 4, 2, 1;
  EXPECT_EQ(classify_element(ProjMap(d)).kind, ElementKind::Hyperbolic);
}

TEST(ClassifyElement, MoreCases) {
  // rotation: elliptic
  Mat r = Mat::Identity(3, 3);
  r.topLeftCorner(2, 2) = plane_rotation(2, 0.7);
  EXPECT_EQ(classify_element(ProjMap(r)).kind, ElementKind::Elliptic);
  // -I is projectively trivial
  EXPECT_EQ(classify_element(ProjMap(-Mat::Identity(3, 3))).kind, ElementKind::Elliptic);
  // a single 2-block is parabolic but not standard
  Mat j2 = Mat::Identity(3, 3);
  j2(0, 1) = 1;
  const auto c = classify_element(ProjMap(j2));
  EXPECT_EQ(c.kind, ElementKind::Parabolic);
  EXPECT_FALSE(c.standard);
  // conjugated standard parabolic
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  Mat q(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) q(i, j) = nd(rng);
  const WeylVector psi({0.0, 0.0, 0.0});
  const Mat m = translation_matrix(psi, {Vec(0), vec({1.0, 0.5})});
  const auto cc = classify_element(ProjMap(q * m * q.inverse()));
  EXPECT_EQ(cc.kind, ElementKind::Parabolic);
  EXPECT_TRUE(cc.standard);
  // hyperbolic translation in T(1,1)
  EXPECT_EQ(classify_element(ProjMap(translation_matrix(WeylVector({1.0, 1.0}), {vec({1}), Vec(0)}))).kind,
            ElementKind::Hyperbolic);
}

TEST(SubgroupMembership, Examples) {
  const auto a = subgroup_membership(WeylVector({1.0, 0.0, 0.0}), translation_matrix(WeylVector({1.0, 0.0, 0.0}), {vec({0.5}), vec({1.0})}));
  EXPECT_EQ(a.weights.size(), 2u);
  EXPECT_FALSE(a.in_P);
  EXPECT_FALSE(a.in_T2);
  const auto id = subgroup_membership(WeylVector({1.0, 0.0, 0.0}), Mat::Identity(4, 4));
  EXPECT_TRUE(id.in_T1 && id.in_T2 && id.in_P);
  const WeylVector f({1.0, 1.0});
  const auto b = subgroup_membership(f, translation_matrix(f, {vec({1, -1}), Vec(0)}));
  EXPECT_TRUE(b.in_T1);
  EXPECT_FALSE(b.in_P);
  // T2 but not T1: a nontrivial corner with Y = 0
  const WeylVector g({1.0, 0.0});
  const auto c = subgroup_membership(g, translation_matrix(g, {vec({1}), Vec(0)}));
  EXPECT_TRUE(c.in_T2);
  EXPECT_FALSE(c.in_T1);
}

TEST(SubgroupMembership, RejectsNonTranslation) {
  const WeylVector psi({1.0, 0.0});
  try {
    subgroup_membership(psi, radial_flow_matrix(psi, 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotInGroup);
  }
}

TEST(Straighten, Examples) {
  const double E = std::exp(1.0);
  const Vec a = straighten(WeylVector({1.0, 0.0}), vec({E, -1}));
  EXPECT_NEAR(a(0), E, 0);
  EXPECT_NEAR(a(1), 0.0, 1e-15);
  const WeylVector p3({1.0, 0.0, 0.0});
  const Vec b = straighten(p3, basepoint(p3));
  EXPECT_EQ(b, basepoint(p3));
  try {
    straighten(WeylVector({1.0, 1.0}), vec({1, 1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedBranch);
  }
}

TEST(Straighten, BoundaryMapsToParaboloid) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(-2, 2);
  for (const auto& psi : Regimes().all) {
    const auto s = make_domain(psi);
    if (s.full()) continue;
    for (int k = 0; k < 30; ++k) {
      Vec x(s.r), y(s.u);
      for (int i = 0; i < s.r; ++i) x(i) = std::exp(U(rng));
      for (int i = 0; i < s.u; ++i) y(i) = U(rng);
      const Vec q = straighten(psi, boundary_point(psi, x, y));
      EXPECT_NEAR(q(s.z_index()), 0.5 * y.squaredNorm(), 1e-10);
    }
  }
}
