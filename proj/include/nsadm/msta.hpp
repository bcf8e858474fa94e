/// @file
/// @brief Discretizations of the multivariable super-twisting term u_s:
///        explicit Euler, implicit Euler with a proximal fixed-point solve
///        (general and decoupled), and the closed-form scalar implicit STA.
#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nsadm/errors.hpp"
#include "nsadm/setvalued.hpp"

namespace nsadm {

template <typename _Scalar> struct MstaGainsTpl {
  using Scalar = _Scalar;
  Scalar k2{11.6};
  Scalar k3{66};
  Scalar k4{0};
  /// Structured gain: k1 = −C + gamma1 M, giving beta = 1 + h gamma1.
  Scalar gamma1{0};
  /// Relaxation of the proximal fixed-point map, in (0, 1).
  Scalar mu{0.5};
  /// Relative tolerance; the absolute one is fp_tol (1 + ‖s‖).
  Scalar fp_tol{1e-12};
  int fp_max_iter{100};

  Scalar alpha2() const { return k4 / k3; }

  void validate() const {
    if (!(k2 > 0) || !(k3 > 0))
      throw ParameterError("msta gains: k2 and k3 must be > 0");
    if (!(k4 >= 0))
      throw ParameterError("msta gains: k4 must be >= 0");
    if (!(gamma1 >= 0))
      throw ParameterError("msta gains: gamma1 must be >= 0");
    if (!(mu > 0 && mu < 1))
      throw ParameterError("msta gains: mu must lie in (0, 1)");
    if (!(fp_tol > 0))
      throw ParameterError("msta gains: fp_tol must be > 0");
    if (fp_max_iter < 1)
      throw ParameterError("msta gains: fp_max_iter must be >= 1");
  }
};

template <typename _Scalar> struct MstaStateTpl {
  using Scalar = _Scalar;
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  VectorX v;

  static MstaStateTpl Zero(Eigen::Index n) { return {VectorX::Zero(n)}; }
};

template <typename _Scalar> struct SolverDiagnosticsTpl {
  using Scalar = _Scalar;
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  int iterations{0};
  Scalar residual{0};
  bool converged{true};
  /// Relaxation actually used after the positivity check.
  Scalar mu{0};
  /// Nominal next sliding state.
  VectorX shat;
  /// Selection from the subdifferential of ‖x‖ + (alpha2/2)‖x‖² at shat.
  VectorX m2;
};

template <typename _Scalar> struct MstaStepTpl {
  using Scalar = _Scalar;
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  VectorX u_s;
  MstaStateTpl<Scalar> state;
  SolverDiagnosticsTpl<Scalar> diag;
};

template <typename _Scalar> struct StaScalarStepTpl {
  using Scalar = _Scalar;
  Scalar u_s;
  Scalar v;
  Scalar phi1;
  Scalar phi2;
};

using MstaGains = MstaGainsTpl<double>;
using MstaState = MstaStateTpl<double>;
using SolverDiagnostics = SolverDiagnosticsTpl<double>;
using MstaStep = MstaStepTpl<double>;
using StaScalarStep = StaScalarStepTpl<double>;

/// Explicit Euler MSTA. Normalized terms vanish at s = 0.
template <typename Derived>
MstaStepTpl<typename Derived::Scalar>
msta_explicit_step(const Eigen::MatrixBase<Derived> &s,
                   const MstaStateTpl<typename Derived::Scalar> &state,
                   const MstaGainsTpl<typename Derived::Scalar> &g,
                   typename Derived::Scalar h) {
  using Scalar = typename Derived::Scalar;
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (!(h > 0))
    throw ParameterError("msta_explicit_step: h must be > 0");
  if (state.v.size() != s.size())
    throw DimensionError("msta_explicit_step: state size mismatch");
  const Scalar ns = s.norm();
  MstaStepTpl<Scalar> out;
  if (ns > Scalar(0)) {
    out.u_s = state.v + g.k2 * s / std::sqrt(ns);
    out.state.v = state.v + h * g.k3 * s / ns + g.k4 * s;
  } else {
    out.u_s = state.v;
    out.state.v = state.v;
  }
  out.diag.shat = VectorX::Zero(s.size());
  out.diag.m2 = ns > Scalar(0) ? VectorX(s / ns) : VectorX::Zero(s.size());
  return out;
}

namespace detail {

/// Root t = u² ≥ 0 of  lin u² + (b u + c0)(1 + a2 u²) = r  for r > c0.
/// The a2 = 0 case is a quadratic in u; otherwise Newton starts from that
/// root, which overestimates u, and descends monotonically.
template <typename Scalar>
Scalar radial_magnitude(Scalar r, Scalar lin, Scalar b, Scalar c0, Scalar a2) {
  if (r <= c0)
    return Scalar(0);
  Scalar u = (-b + std::sqrt(b * b + Scalar(4) * lin * (r - c0))) /
             (Scalar(2) * lin);
  if (a2 == Scalar(0))
    return u * u;
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  for (int it = 0; it < 100; ++it) {
    const Scalar q = Scalar(1) + a2 * u * u;
    const Scalar f = lin * u * u + (b * u + c0) * q - r;
    const Scalar df =
        Scalar(2) * lin * u + b * q + (b * u + c0) * Scalar(2) * a2 * u;
    const Scalar step = f / df;
    u = std::max(Scalar(0), u - step);
    if (std::abs(step) <= Scalar(4) * eps * (Scalar(1) + u))
      break;
  }
  return u * u;
}

/// Resolvent (I + μT)⁻¹z of T(x) = h(k2‖x‖^{1/2} + h k3) ∂Ψ₂(x).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>
msta_resolvent(const Eigen::MatrixBase<Derived> &z, typename Derived::Scalar mu,
               const MstaGainsTpl<typename Derived::Scalar> &g,
               typename Derived::Scalar h) {
  using Scalar = typename Derived::Scalar;
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Scalar r = z.norm();
  const Scalar c0 = mu * h * h * g.k3;
  if (r <= c0)
    return VectorX::Zero(z.size());
  const Scalar t =
      radial_magnitude(r, Scalar(1), mu * h * g.k2, c0, g.alpha2());
  return (t / r) * z;
}

/// Forward-backward iteration ŝ ← (I + μT)⁻¹((I − μL)ŝ + μs) from ŝ = 0.
template <typename Scalar, typename ApplyL>
SolverDiagnosticsTpl<Scalar>
proximal_fixed_point(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> &s,
                     ApplyL &&apply_L, Scalar mu,
                     const MstaGainsTpl<Scalar> &g, Scalar h) {
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  SolverDiagnosticsTpl<Scalar> d;
  d.mu = mu;
  d.converged = false;
  const Scalar tol = g.fp_tol * (Scalar(1) + s.norm());
  VectorX shat = VectorX::Zero(s.size());
  for (int it = 1; it <= g.fp_max_iter; ++it) {
    const VectorX z = shat - mu * (apply_L(shat) - s);
    VectorX next = msta_resolvent(z, mu, g, h);
    d.residual = (next - shat).norm();
    d.iterations = it;
    shat = std::move(next);
    if (d.residual <= tol) {
      d.converged = true;
      break;
    }
  }
  d.shat = std::move(shat);
  return d;
}

/// m̂₂ from the inclusion residual: h(k2‖ŝ‖^{1/2} + h k3) m̂₂ = s − Lŝ.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1>
recover_m2(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> &s,
           const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> &Lshat,
           const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> &shat,
           const MstaGainsTpl<Scalar> &g, Scalar h) {
  const Scalar gamma = g.k2 * std::sqrt(shat.norm()) + h * g.k3;
  return (s - Lshat) / (h * gamma);
}

template <typename Scalar>
MstaStepTpl<Scalar>
assemble_step(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> &s,
              const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> &Lshat,
              SolverDiagnosticsTpl<Scalar> diag,
              const MstaStateTpl<Scalar> &state, const MstaGainsTpl<Scalar> &g,
              Scalar h) {
  MstaStepTpl<Scalar> out;
  diag.m2 = recover_m2(s, Lshat, diag.shat, g, h);
  out.state.v = state.v + h * g.k3 * diag.m2;
  // k2‖ŝ‖^{1/2} m̂₂ + h k3 m̂₂ = (s − Lŝ)/h, hence the compact form.
  out.u_s = (s - Lshat) / h + out.state.v;
  out.diag = std::move(diag);
  return out;
}

} // namespace detail

/// Smallest eigenvalue of the symmetric matrix L + Lᵀ − μLᵀL.
template <typename Derived>
typename Derived::Scalar relaxation_margin(const Eigen::MatrixBase<Derived> &L,
                                           typename Derived::Scalar mu) {
  using Scalar = typename Derived::Scalar;
  using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  MatrixX S = L + L.transpose() - mu * L.transpose() * L;
  S = Scalar(0.5) * (S + S.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixX> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Halves mu until L + Lᵀ − μLᵀL ≻ 0.
template <typename Derived>
typename Derived::Scalar admissible_relaxation(const Eigen::MatrixBase<Derived> &L,
                                               typename Derived::Scalar mu) {
  using Scalar = typename Derived::Scalar;
  for (int k = 0; k < 64; ++k, mu *= Scalar(0.5))
    if (relaxation_margin(L, mu) > Scalar(0))
      return mu;
  throw SolverError("no admissible relaxation: M^-1 A has no positive "
                    "definite symmetric part");
}

/// A_k = M_k + h(C_k + K1).
template <typename D1, typename D2, typename D3>
Eigen::Matrix<typename D1::Scalar, Eigen::Dynamic, Eigen::Dynamic>
msta_system_matrix(const Eigen::MatrixBase<D1> &Mk,
                   const Eigen::MatrixBase<D2> &Ck,
                   const Eigen::MatrixBase<D3> &K1, typename D1::Scalar h) {
  if (Mk.rows() != Ck.rows() || Mk.rows() != K1.rows() ||
      Mk.cols() != Ck.cols() || Mk.cols() != K1.cols())
    throw DimensionError("msta_system_matrix: size mismatch");
  return Mk + h * (Ck + K1);
}

/// Solves M⁻¹A ŝ + h(k2‖ŝ‖^{1/2} + h k3) ∂Ψ₂(ŝ) ∋ s.
template <typename D1, typename D2, typename D3>
SolverDiagnosticsTpl<typename D1::Scalar>
solve_shat_vector(const Eigen::MatrixBase<D1> &s,
                  const Eigen::MatrixBase<D2> &Ak,
                  const Eigen::MatrixBase<D3> &Mk,
                  const MstaGainsTpl<typename D1::Scalar> &g,
                  typename D1::Scalar h) {
  using Scalar = typename D1::Scalar;
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = s.size();
  if (Ak.rows() != n || Ak.cols() != n || Mk.rows() != n || Mk.cols() != n)
    throw DimensionError("solve_shat_vector: size mismatch");
  if (!(h > 0))
    throw ParameterError("solve_shat_vector: h must be > 0");
  g.validate();
  Eigen::FullPivLU<MatrixX> lu(Mk);
  if (!lu.isInvertible())
    throw SolverError("solve_shat_vector: singular inertia matrix");
  const MatrixX L = lu.solve(MatrixX(Ak));
  const Scalar mu = admissible_relaxation(L, g.mu);
  const VectorX sv = s;
  auto d = detail::proximal_fixed_point<Scalar>(
      sv, [&](const VectorX &x) -> VectorX { return L * x; }, mu, g, h);
  if (!d.converged)
    throw SolverError("solve_shat_vector: no convergence in " +
                      std::to_string(g.fp_max_iter) + " iterations (residual " +
                      std::to_string(d.residual) + ")");
  d.m2 = detail::recover_m2<Scalar>(sv, L * d.shat, d.shat, g, h);
  return d;
}

/// Decoupled variant with M⁻¹A replaced by beta I. The fixed point is radial
/// along s, so a non-converged iteration falls back to the exact radial root.
template <typename Derived>
SolverDiagnosticsTpl<typename Derived::Scalar>
solve_shat_decoupled(const Eigen::MatrixBase<Derived> &s,
                     typename Derived::Scalar beta,
                     const MstaGainsTpl<typename Derived::Scalar> &g,
                     typename Derived::Scalar h) {
  using Scalar = typename Derived::Scalar;
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (!(beta > 0))
    throw ParameterError("solve_shat_decoupled: beta must be > 0");
  if (!(h > 0))
    throw ParameterError("solve_shat_decoupled: h must be > 0");
  g.validate();
  Scalar mu = g.mu;
  while (!(Scalar(2) * beta - mu * beta * beta > Scalar(0)))
    mu *= Scalar(0.5);
  const VectorX sv = s;
  auto d = detail::proximal_fixed_point<Scalar>(
      sv, [&](const VectorX &x) -> VectorX { return beta * x; }, mu, g, h);
  if (!d.converged) {
    const Scalar r = sv.norm();
    const Scalar t = detail::radial_magnitude(r, beta, h * g.k2,
                                              h * h * g.k3, g.alpha2());
    d.shat = r > Scalar(0) ? VectorX((t / r) * sv) : VectorX::Zero(sv.size());
    d.residual = Scalar(0);
    d.converged = true;
  }
  d.m2 = detail::recover_m2<Scalar>(sv, beta * d.shat, d.shat, g, h);
  return d;
}

/// Implicit Euler MSTA with A_k = M_k + h(C_k + k1).
template <typename D1, typename D2, typename D3>
MstaStepTpl<typename D1::Scalar>
msta_implicit_step(const Eigen::MatrixBase<D1> &s,
                   const Eigen::MatrixBase<D2> &Mk,
                   const Eigen::MatrixBase<D3> &Ak,
                   const MstaGainsTpl<typename D1::Scalar> &g,
                   typename D1::Scalar h,
                   const MstaStateTpl<typename D1::Scalar> &state) {
  using Scalar = typename D1::Scalar;
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (state.v.size() != s.size())
    throw DimensionError("msta_implicit_step: state size mismatch");
  auto d = solve_shat_vector(s, Ak, Mk, g, h);
  const MatrixX L = Mk.fullPivLu().solve(MatrixX(Ak));
  const VectorX sv = s;
  const VectorX Lshat = L * d.shat;
  return detail::assemble_step<Scalar>(sv, Lshat, std::move(d), state, g, h);
}

/// Implicit Euler MSTA with M⁻¹A ≈ beta I, beta = 1 + h gamma1.
template <typename Derived>
MstaStepTpl<typename Derived::Scalar>
msta_implicit_decoupled_step(const Eigen::MatrixBase<Derived> &s,
                             const MstaGainsTpl<typename Derived::Scalar> &g,
                             typename Derived::Scalar h,
                             const MstaStateTpl<typename Derived::Scalar> &state) {
  using Scalar = typename Derived::Scalar;
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (state.v.size() != s.size())
    throw DimensionError("msta_implicit_decoupled_step: state size mismatch");
  const Scalar beta = Scalar(1) + h * g.gamma1;
  auto d = solve_shat_decoupled(s, beta, g, h);
  const VectorX sv = s;
  const VectorX Lshat = beta * d.shat;
  return detail::assemble_step<Scalar>(sv, Lshat, std::move(d), state, g, h);
}

/// Closed-form implicit Euler STA for one scalar channel. k4 is ignored.
template <typename Scalar>
StaScalarStepTpl<Scalar> sta_scalar_implicit_step(Scalar s,
                                                  const MstaGainsTpl<Scalar> &g,
                                                  Scalar beta, Scalar h,
                                                  Scalar v) {
  if (!(h > 0))
    throw ParameterError("sta_scalar_implicit_step: h must be > 0");
  if (!(beta >= 1))
    throw ParameterError("sta_scalar_implicit_step: beta must be >= 1");
  const Scalar dz = h * h * g.k3;
  const Scalar as = std::abs(s);
  StaScalarStepTpl<Scalar> out;
  out.phi2 = sat(s / dz);
  const Scalar root = std::sqrt(h * h * g.k2 * g.k2 +
                                Scalar(4) * beta * std::max(Scalar(0), as - dz));
  out.phi1 = sign0(s) * ((h * g.k3 / g.k2) * sat(as / dz) -
                         h * g.k2 / (Scalar(2) * beta) + root / (Scalar(2) * beta));
  out.v = v + h * g.k3 * out.phi2;
  out.u_s = g.k2 * out.phi1 + out.v;
  return out;
}

} // namespace nsadm
