// Independent reference computations used by the unit and acceptance tests.
// Written directly from the defining equations; they share no code paths
// with the library beyond plain Eigen arithmetic.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline double sgn(double x) { return x > 0 ? 1.0 : x < 0 ? -1.0 : 0.0; }

/// Root of a nondecreasing scalar function on [lo, hi], to bit resolution.
inline double bisect(const std::function<double(double)> &f, double lo, double hi) {
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi))
      return mid;
    (f(mid) < 0 ? lo : hi) = mid;
  }
}

/// Numerical minimizer of f(x) = (1/2μ)‖x − z‖² + a‖x‖ + (b/2)‖x‖².
/// x = 0 is optimal iff 0 ∈ ∂f(0), i.e. ‖z‖/μ ≤ a. Otherwise f is smooth
/// near its minimizer and damped Newton from x = z converges.
inline Vec prox_numeric(const Vec &z, double mu, double a, double b) {
  const auto n = z.size();
  if (z.norm() / mu <= a)
    return Vec::Zero(n);
  const auto f = [&](const Vec &x) {
    return (x - z).squaredNorm() / (2 * mu) + a * x.norm() + 0.5 * b * x.squaredNorm();
  };
  const Mat I = Mat::Identity(n, n);
  Vec x = z;
  for (int it = 0; it < 200; ++it) {
    const double r = x.norm();
    const Vec grad = (x - z) / mu + a * x / r + b * x;
    const Mat H = I / mu + a * (I - x * x.transpose() / (r * r)) / r + b * I;
    const Vec step = H.ldlt().solve(grad);
    double t = 1;
    while (t > 1e-20 && (x - t * step).norm() == 0)
      t *= 0.5;
    while (t > 1e-20 && f(x - t * step) > f(x))
      t *= 0.5;
    x -= t * step;
    if ((t * step).norm() <= 1e-17 * (1 + x.norm()))
      break;
  }
  return x;
}

struct StaOut {
  double u_s, v, shat;
};

/// Implicit STA step from the inclusion
///   s ∈ βŝ + h(k2|ŝ|^{1/2} + h k3) sgn(ŝ),
///   u_s = k2 |ŝ|^{1/2} sgn(ŝ) + h k3 σ + v⁺,  v⁺ = v + h k3 σ,
/// where σ ∈ sgn(ŝ) is the selection satisfying the inclusion.
inline StaOut sta_inclusion(double s, double k2, double k3, double beta, double h, double v) {
  const double c0 = h * h * k3;
  double shat = 0, sigma = 0;
  if (std::abs(s) <= c0) {
    sigma = s / c0;
  } else {
    const double r = std::abs(s);
    const double t = bisect([&](double x) { return beta * x + h * k2 * std::sqrt(x) + c0 - r; },
                            0.0, r / beta);
    shat = sgn(s) * t;
    sigma = sgn(s);
  }
  const double vn = v + h * k3 * sigma;
  return {k2 * sgn(shat) * std::sqrt(std::abs(shat)) + h * k3 * sigma + vn, vn, shat};
}

struct RecursionIn {
  Mat Mx, Bx, M, C, K1, Mr;
  Vec G, F;
  double h, Lambda;
  Vec qx_prev, qxd_prev, q_prev, q, fc, fd, u_s;
};

struct RecursionOut {
  Vec tau_star, tau, qx, qxd, s;
};

/// Sliding variable of the recursion, needed before u_s is known.
inline Vec sliding(const RecursionIn &in) {
  const Vec ux = (in.Mx + in.Bx * in.h).inverse() * (in.Mx * in.qxd_prev + in.h * (in.fc + in.fd));
  const Vec qxs = in.qx_prev + in.h * ux;
  const Vec qe = qxs - in.q;
  return (qe - (in.qx_prev - in.q_prev)) / in.h + in.Lambda * qe;
}

/// Straight-line evaluation of one controller period.
inline RecursionOut recursion(const RecursionIn &in) {
  const double h = in.h;
  const Vec ux = (in.Mx + in.Bx * h).inverse() * (in.Mx * in.qxd_prev + h * (in.fc + in.fd));
  const Vec qxs = in.qx_prev + h * ux;
  const Mat B = in.M * in.Lambda + in.K1;
  const Mat Bhat = B + in.C;
  const Mat Khat = Bhat / h + (in.C + in.K1) * in.Lambda;
  const Mat D = in.M / (h * h) + Khat;
  const Vec phia = ((in.M + in.C * h) * in.q + B * in.q_prev * h) / (h * h) + in.G + in.Mr * in.u_s;
  const Vec phib = in.M * (in.qx_prev + h * in.qxd_prev) / (h * h) + Bhat * in.qx_prev / h;
  const Vec q1 = in.q + D.inverse() * (phib - phia);
  RecursionOut o;
  o.s = sliding(in);
  o.tau_star = D * (qxs - q1);
  o.tau = o.tau_star;
  for (Eigen::Index i = 0; i < o.tau.size(); ++i)
    o.tau[i] = std::max(-in.F[i], std::min(in.F[i], o.tau[i]));
  o.qx = D.inverse() * o.tau + q1;
  o.qxd = (o.qx - in.qx_prev) / h;
  return o;
}

/// Reference 1-DoF arm: M = m l²/3 + m lc² + a sin q, C = c cos q, G = m g lc cos q.
struct OneDof {
  double m = 5, l = 0.5, lc = 0.25, a = 0.2, c = 0.1, g = 9.81;
  double M(double q) const { return m * l * l / 3 + m * lc * lc + a * std::sin(q); }
  double G(double q) const { return m * g * lc * std::cos(q); }
  double qdd(double q, double qd, double tau) const {
    return (tau - c * std::cos(q) * qd - G(q)) / M(q);
  }
};

} // namespace oracle
