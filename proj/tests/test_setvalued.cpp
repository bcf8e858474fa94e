#include <gtest/gtest.h>

#include <random>

#include "nsadm/setvalued.hpp"
#include "oracles.hpp"

using namespace nsadm;
using oracle::Vec;

TEST(Sat, Branches) {
  EXPECT_EQ(sat(0.5), 0.5);
  EXPECT_EQ(sat(-3.0), -1.0);
  EXPECT_EQ(sat(1.0), 1.0);
}

TEST(Sign0, Values) {
  EXPECT_EQ(sign0(2.5), 1.0);
  EXPECT_EQ(sign0(0.0), 0.0);
  EXPECT_EQ(sign0(-1e-300), -1.0);
}

TEST(ProjectBox, Examples) {
  EXPECT_TRUE(project_box(Vec{{-5, 2}}, BoxConstraint(Vec{{3, 4}})).isApprox(Vec{{-3, 2}}));
  EXPECT_EQ(project_box(Vec{{0, 0}}, BoxConstraint(Vec{{3, 4}})), Vec::Zero(2));
  EXPECT_EQ(project_box(Vec{{10}}, BoxConstraint(Vec{{3}}))[0], 3.0);
}

TEST(ProjectBox, Errors) {
  EXPECT_THROW(project_box(Vec{{1, 2, 3}}, BoxConstraint(Vec{{3, 4}})), DimensionError);
  EXPECT_THROW(BoxConstraint(Vec{{3, 0}}), ParameterError);
  EXPECT_THROW(BoxConstraint(Vec{{-1}}), ParameterError);
}

TEST(ProjectBox, IdempotentNonExpansiveAndNormalCone) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-10, 10), L(0.3, 6), P(-1, 1);
  for (int k = 0; k < 2000; ++k) {
    const int n = 1 + k % 6;
    Vec F(n), y(n), y2(n);
    for (int i = 0; i < n; ++i) {
      F[i] = L(rng);
      y[i] = U(rng);
      y2[i] = U(rng);
    }
    const BoxConstraint box(F);
    const Vec p = project_box(y, box), p2 = project_box(y2, box);
    ASSERT_EQ(project_box(p, box), p);
    ASSERT_LE((p - p2).norm(), (y - y2).norm() + 1e-12);
    // y inside the box is returned unchanged; outside it is moved.
    ASSERT_EQ(p == y, (y.cwiseAbs().array() <= F.array()).all());
    for (int j = 0; j < 5; ++j) {
      Vec q(n);
      for (int i = 0; i < n; ++i)
        q[i] = P(rng) * F[i];
      ASSERT_LE((y - p).dot(q - p), 1e-10);
    }
  }
}

TEST(Prox, MatchesNumericalMinimizer) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-3, 3), M(0.05, 2), A(0, 2), B(0, 3);
  double worst = 0;
  for (int k = 0; k < 1000; ++k) {
    const int n = 1 + k % 4;
    Vec z(n);
    for (int i = 0; i < n; ++i)
      z[i] = U(rng);
    const double mu = M(rng), a = A(rng), b = B(rng);
    const Vec p = prox_norm_quad(z, mu, NormQuadWeights{a, b});
    worst = std::max(worst, (p - oracle::prox_numeric(z, mu, a, b)).norm());
  }
  EXPECT_LE(worst, 1e-8);
}

TEST(Prox, ThresholdAndShrink) {
  // ‖z‖ ≤ μa gives 0.
  EXPECT_EQ(prox_norm_quad(Vec{{0.3, 0.4}}, 1.0, NormQuadWeights{0.5, 0}), Vec::Zero(2));
  // Pure quadratic: z / (1 + μb).
  EXPECT_TRUE(prox_norm_quad(Vec{{2.0}}, 0.5, NormQuadWeights{0, 2}).isApprox(Vec{{1.0}}));
  EXPECT_THROW(prox_norm_quad(Vec{{1.0}}, 0.0, NormQuadWeights{1, 0}), ParameterError);
  EXPECT_THROW(prox_norm_quad(Vec{{1.0}}, 1.0, NormQuadWeights{-1, 0}), ParameterError);
}

TEST(Prox, FirmlyNonExpansive) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> U(-3, 3);
  const NormQuadWeights w{0.7, 1.3};
  for (int k = 0; k < 2000; ++k) {
    Vec x(3), y(3);
    for (int i = 0; i < 3; ++i) {
      x[i] = U(rng);
      y[i] = U(rng);
    }
    const Vec px = prox_norm_quad(x, 0.8, w), py = prox_norm_quad(y, 0.8, w);
    ASSERT_LE((px - py).squaredNorm(), (px - py).dot(x - y) + 1e-12);
  }
}

TEST(Prox, FloatScalar) {
  const Eigen::VectorXf z = Eigen::VectorXf::Constant(2, 3.0f);
  const auto p = prox_norm_quad(z, 1.0f, NormQuadWeightsTpl<float>{1.0f, 0.0f});
  EXPECT_NEAR(p.norm(), z.norm() - 1.0f, 1e-5f);
}

TEST(VariationalResidual, NonPositiveForProjection) {
  const BoxConstraint box(Vec{{3, 4}});
  const Vec ys{{5, -9}};
  const Vec p = project_box(ys, box);
  EXPECT_LE(variational_residual(ys, p, box, box_probe_grid<double>(2)), 1e-12);
  // A wrong "projection" violates the inequality.
  EXPECT_GT(variational_residual(ys, Vec{{0, 0}}, box, box_probe_grid<double>(2)), 0);
}
