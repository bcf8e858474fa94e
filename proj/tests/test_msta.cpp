#include <gtest/gtest.h>

#include <random>

#include "nsadm/msta.hpp"
#include "oracles.hpp"

using namespace nsadm;
using oracle::Mat;
using oracle::Vec;

namespace {

double psi2(const Vec &x, double a2) { return x.norm() + 0.5 * a2 * x.squaredNorm(); }

} // namespace

TEST(StaScalar, MatchesInclusionBisection) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0, 1);
  double worst = 0;
  for (int k = 0; k < 1000; ++k) {
    MstaGains g;
    g.k2 = 1 + 39 * U(rng);
    g.k3 = 5 + 395 * U(rng);
    const double h = std::pow(10.0, -4 + 2 * U(rng));
    const double beta = 1 + h * 400 * U(rng);
    const double s = (k % 2 ? 1 : -1) * std::pow(10.0, -8 + 8 * U(rng));
    const double v = 10 * U(rng) - 5;
    const auto a = sta_scalar_implicit_step(s, g, beta, h, v);
    const auto o = oracle::sta_inclusion(s, g.k2, g.k3, beta, h, v);
    worst = std::max({worst, std::abs(a.u_s - o.u_s), std::abs(a.v - o.v)});
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(StaScalar, SlidingRegimeHoldsIntegrator) {
  MstaGains g;
  const double h = 1e-3;
  // Inside |s| ≤ h²k3 the selection is s/(h²k3) and ŝ = 0.
  const double s = 0.5 * h * h * g.k3;
  const auto r = sta_scalar_implicit_step(s, g, 1.0, h, 0.0);
  EXPECT_NEAR(r.phi2, 0.5, 1e-15);
  EXPECT_NEAR(r.v, h * g.k3 * 0.5, 1e-15);
  EXPECT_THROW(sta_scalar_implicit_step(1.0, g, 0.5, h, 0.0), ParameterError);
}

TEST(MstaVector, ScalarCaseAgrees) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0, 1);
  double worst = 0;
  for (int k = 0; k < 1000; ++k) {
    MstaGains g;
    g.k2 = 1 + 39 * U(rng);
    g.k3 = 5 + 395 * U(rng);
    g.fp_max_iter = 400;
    g.fp_tol = 1e-14;
    const double h = std::pow(10.0, -4 + 2 * U(rng));
    const double beta = 1 + h * 100 * U(rng);
    const Vec s = Vec::Constant(1, (k % 2 ? 1 : -1) * std::pow(10.0, -8 + 8 * U(rng)));
    const MstaState st{Vec::Constant(1, 10 * U(rng) - 5)};
    const auto a = msta_implicit_step(s, Mat::Identity(1, 1), Mat::Constant(1, 1, beta), g, h, st);
    const auto d = msta_implicit_decoupled_step(s, [&] { auto q = g; q.gamma1 = (beta - 1) / h; return q; }(), h, st);
    const auto b = sta_scalar_implicit_step(s[0], g, beta, h, st.v[0]);
    worst = std::max({worst, std::abs(a.u_s[0] - b.u_s), std::abs(d.u_s[0] - b.u_s)});
  }
  EXPECT_LE(worst, 1e-8);
}

TEST(MstaVector, InclusionHoldsForCoupledSystem) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(0, 1);
  for (int k = 0; k < 200; ++k) {
    const int n = 2 + k % 2;
    MstaGains g;
    g.k2 = 1 + 29 * U(rng);
    g.k3 = 10 + 290 * U(rng);
    g.k4 = k % 2 ? 50 * U(rng) : 0.0;
    g.fp_max_iter = 5000;
    g.fp_tol = 1e-14;
    const double h = 1e-3;
    Mat R = Mat::Random(n, n);
    const Mat M = R * R.transpose() + Mat::Identity(n, n);
    const Mat A = msta_system_matrix(M, Mat(0.2 * Mat::Random(n, n)), Mat(30 * Mat::Identity(n, n)), h);
    Vec s(n);
    for (int i = 0; i < n; ++i)
      s[i] = (2 * U(rng) - 1) * std::pow(10.0, -6 + 6 * U(rng));
    const auto d = solve_shat_vector(s, A, M, g, h);
    ASSERT_TRUE(d.converged);
    const Mat L = M.inverse() * A;
    // L ŝ + h(k2‖ŝ‖^{1/2} + h k3) m̂₂ = s with m̂₂ ∈ ∂Ψ₂(ŝ).
    const double ns = d.shat.norm();
    const Vec res = L * d.shat + h * (g.k2 * std::sqrt(ns) + h * g.k3) * d.m2 - s;
    ASSERT_LE(res.norm(), 1e-12 * (1 + s.norm()));
    if (ns > 0)
      ASSERT_LE((d.m2 - (d.shat / ns + g.alpha2() * d.shat)).norm(), 1e-6);
    else
      ASSERT_LE(d.m2.norm(), 1 + 1e-9);
  }
}

TEST(MstaVector, RelaxationReducedUntilPositive) {
  Mat L(2, 2);
  L << 3, 0, 0, 3;
  // 2L − μL² ≻ 0 needs μ < 2/3.
  const double mu = admissible_relaxation(L, 0.9);
  EXPECT_LT(mu, 2.0 / 3.0);
  EXPECT_GT(relaxation_margin(L, mu), 0);
  Mat bad(1, 1);
  bad << -1;
  EXPECT_THROW(admissible_relaxation(bad, 0.5), SolverError);
}

TEST(MstaLyapunov, UnperturbedDecrease) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> U(0, 1);
  long violations = 0;
  for (int run = 0; run < 30; ++run) {
    const int n = 1 + run % 3;
    MstaGains g;
    g.k2 = 1 + 29 * U(rng);
    g.k3 = 10 + 290 * U(rng);
    g.k4 = run % 2 ? 20 * U(rng) : 0.0;
    g.fp_max_iter = 2000;
    g.fp_tol = 1e-15;
    const double h = std::pow(10.0, -3.5 + 1.5 * U(rng));
    Vec s1(n), s2(n);
    for (int i = 0; i < n; ++i) {
      s1[i] = 2 * U(rng) - 1;
      s2[i] = 2 * U(rng) - 1;
    }
    const Mat I = Mat::Identity(n, n);
    Vec shat = s1 - h * s2;
    double V = g.k3 * psi2(shat, g.alpha2()) + 0.5 * s2.squaredNorm();
    for (int k = 0; k < 1000; ++k) {
      const auto d = solve_shat_vector(s1, I, I, g, h);
      s2 -= h * g.k3 * d.m2;
      shat = d.shat;
      s1 = shat + h * s2;
      const double Vn = g.k3 * psi2(shat, g.alpha2()) + 0.5 * s2.squaredNorm();
      violations += Vn > V + 1e-12;
      V = Vn;
    }
  }
  EXPECT_EQ(violations, 0);
}

TEST(MstaExplicit, Formula) {
  MstaGains g;
  g.k4 = 2;
  const Vec s{{0.3, -0.4}};
  const MstaState st{Vec{{0.1, 0.2}}};
  const auto r = msta_explicit_step(s, st, g, 1e-3);
  EXPECT_TRUE(r.u_s.isApprox(st.v + g.k2 * s / std::sqrt(0.5)));
  EXPECT_TRUE(r.state.v.isApprox(st.v + 1e-3 * g.k3 * s / 0.5 + 2 * s));
  const auto z = msta_explicit_step(Vec::Zero(2), st, g, 1e-3);
  EXPECT_EQ(z.u_s, st.v);
}

TEST(MstaGains, Validation) {
  MstaGains g;
  g.k2 = 0;
  EXPECT_THROW(g.validate(), ParameterError);
  g = MstaGains{};
  g.mu = 1;
  EXPECT_THROW(g.validate(), ParameterError);
}
