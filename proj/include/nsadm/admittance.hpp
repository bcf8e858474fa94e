/// @file
/// @brief Implicit-Euler set-valued admittance controller: proxy prediction,
///        sliding variable, inner-loop torque candidate, box projection and
///        proxy correction, plus a naive clamped PD baseline.
#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <functional>
#include <string>

#include "nsadm/errors.hpp"
#include "nsadm/msta.hpp"
#include "nsadm/setvalued.hpp"

namespace nsadm {

/// Discretization used for the robust term u_s.
enum class UsMode { Explicit, ImplicitVector, ImplicitDecoupled, ScalarImplicit };

inline const char *to_string(UsMode m) {
  switch (m) {
  case UsMode::Explicit:
    return "explicit";
  case UsMode::ImplicitVector:
    return "implicit-vector";
  case UsMode::ImplicitDecoupled:
    return "implicit-decoupled";
  case UsMode::ScalarImplicit:
    return "scalar-implicit";
  }
  return "?";
}

inline UsMode us_mode_from_string(const std::string &s) {
  if (s == "explicit")
    return UsMode::Explicit;
  if (s == "implicit-vector")
    return UsMode::ImplicitVector;
  if (s == "implicit-decoupled")
    return UsMode::ImplicitDecoupled;
  if (s == "scalar-implicit")
    return UsMode::ScalarImplicit;
  throw ConfigError("unknown u_s mode '" + s +
                    "' (explicit, implicit-vector, implicit-decoupled, "
                    "scalar-implicit)");
}

/// Either a scalar k1 (k1 I) or the structured form k1 = −C + gamma1 M.
template <typename _Scalar> struct K1SpecTpl {
  using Scalar = _Scalar;
  bool structured{false};
  Scalar k1{30};
};

template <typename _Scalar> struct AdmittanceGainsTpl {
  using Scalar = _Scalar;
  using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  MatrixX Mx;
  MatrixX Bx;
  Scalar Lambda{10};
  K1SpecTpl<Scalar> k1;
  MstaGainsTpl<Scalar> msta;
  BoxConstraintTpl<Scalar> box;
  Scalar h{1e-3};
  UsMode us_mode{UsMode::ScalarImplicit};

  Eigen::Index dim() const { return box.dim(); }

  void validate() const {
    const Eigen::Index n = dim();
    if (n < 1)
      throw ParameterError("admittance gains: empty torque box");
    if (Mx.rows() != n || Mx.cols() != n || Bx.rows() != n || Bx.cols() != n)
      throw DimensionError("admittance gains: Mx/Bx must be " +
                           std::to_string(n) + "x" + std::to_string(n));
    box.validate();
    msta.validate();
    if (!(h > 0))
      throw ParameterError("admittance gains: h must be > 0");
    if (!(Lambda > 0) || !(Lambda < Scalar(1) / h))
      throw ParameterError("admittance gains: Lambda must lie in (0, 1/h)");
    Eigen::SelfAdjointEigenSolver<MatrixX> es(Scalar(0.5) * (Mx + Mx.transpose()),
                                              Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues().minCoeff() > 0) || !Mx.isApprox(Mx.transpose()))
      throw ParameterError("admittance gains: Mx must be symmetric positive definite");
    // Proxy stability: −Bx Mx⁻¹ Hurwitz.
    const MatrixX A = -Bx * Mx.inverse();
    Eigen::EigenSolver<MatrixX> ev(A, false);
    if (!(ev.eigenvalues().real().maxCoeff() < 0))
      throw ParameterError("admittance gains: -Bx Mx^-1 must be Hurwitz");
  }
};

template <typename _Scalar> struct AdmittanceStateTpl {
  using Scalar = _Scalar;
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  VectorX qx_prev;
  VectorX qxd_prev;
  VectorX q_prev;
  VectorX qe_prev;
  MstaStateTpl<Scalar> msta_state;

  /// Zero-error start: q_x = q, all rates and the integrator at zero.
  template <typename Derived>
  static AdmittanceStateTpl Initial(const Eigen::MatrixBase<Derived> &q0) {
    const Eigen::Index n = q0.size();
    return {q0, VectorX::Zero(n), q0, VectorX::Zero(n),
            MstaStateTpl<Scalar>::Zero(n)};
  }
};

template <typename _Scalar> struct MeasurementTpl {
  using Scalar = _Scalar;
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  VectorX q;
  /// Joint-space contact torque Jᵀ f̄_c.
  VectorX fc;
  /// Desired joint torque.
  VectorX fd;
};

/// Controller-side model. robust_mass_fn weights the robust term M u_s and
/// the MSTA system matrix; when empty, mass_fn is used.
template <typename _Scalar> struct ModelEstimateTpl {
  using Scalar = _Scalar;
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  std::function<MatrixX(const VectorX &)> mass_fn;
  std::function<MatrixX(const VectorX &, const VectorX &)> coriolis_fn;
  std::function<VectorX(const VectorX &)> gravity_fn;
  std::function<MatrixX(const VectorX &)> robust_mass_fn;

  /// Constant estimates, gravity-free unless G is given.
  static ModelEstimateTpl Constant(const MatrixX &M, const MatrixX &C,
                                   const VectorX &G) {
    ModelEstimateTpl m;
    m.mass_fn = [M](const VectorX &) { return M; };
    m.coriolis_fn = [C](const VectorX &, const VectorX &) { return C; };
    m.gravity_fn = [G](const VectorX &) { return G; };
    return m;
  }
};

/// Model estimates evaluated once per controller step.
template <typename _Scalar> struct ModelSampleTpl {
  using Scalar = _Scalar;
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  MatrixX M;
  MatrixX C;
  VectorX G;
  MatrixX Mr;
  MatrixX K1;
};

template <typename _Scalar> struct StepDiagnosticsTpl {
  using Scalar = _Scalar;
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  VectorX tau_star;
  VectorX tau;
  VectorX qx_star;
  VectorX q1_star;
  VectorX s;
  VectorX qe;
  VectorX qed;
  VectorX u_s;
  Eigen::Matrix<bool, Eigen::Dynamic, 1> saturated;
  Scalar lambda_vi_residual{0};
  SolverDiagnosticsTpl<Scalar> solver;

  bool any_saturated() const { return saturated.any(); }
};

template <typename _Scalar> struct AdmittanceStepTpl {
  using Scalar = _Scalar;
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  VectorX tau;
  AdmittanceStateTpl<Scalar> state;
  StepDiagnosticsTpl<Scalar> diag;
};

template <typename _Scalar> struct ProxyPredictionTpl {
  using VectorX = Eigen::Matrix<_Scalar, Eigen::Dynamic, 1>;
  VectorX ux_star;
  VectorX qx_star;
};

template <typename _Scalar> struct SlidingTpl {
  using VectorX = Eigen::Matrix<_Scalar, Eigen::Dynamic, 1>;
  VectorX qe;
  VectorX qed;
  VectorX s;
};

template <typename _Scalar> struct InnerCandidateTpl {
  using VectorX = Eigen::Matrix<_Scalar, Eigen::Dynamic, 1>;
  using MatrixX = Eigen::Matrix<_Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  VectorX q1_star;
  VectorX tau_star;
  /// M/h² + K̂, the map from (q_x − q*₁) to torque.
  MatrixX D;
};

/// Gains of the naive baseline: τ = clamp(Kp q_e + Kd q̇_e + Ĝ).
template <typename _Scalar> struct PdGainsTpl {
  _Scalar Kp{300};
  _Scalar Kd{31};
};

using AdmittanceGains = AdmittanceGainsTpl<double>;
using AdmittanceState = AdmittanceStateTpl<double>;
using Measurement = MeasurementTpl<double>;
using ModelEstimate = ModelEstimateTpl<double>;
using ModelSample = ModelSampleTpl<double>;
using StepDiagnostics = StepDiagnosticsTpl<double>;
using AdmittanceStep = AdmittanceStepTpl<double>;
using PdGains = PdGainsTpl<double>;
using K1Spec = K1SpecTpl<double>;

namespace detail {

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1>
checked_solve(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> &A,
              const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> &b,
              const char *what) {
  Eigen::FullPivLU<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> lu(A);
  if (!lu.isInvertible())
    throw SolverError(std::string(what) + ": singular matrix");
  return lu.solve(b);
}

} // namespace detail

/// Evaluates M̂, Ĉ, Ĝ, the robust inertia and k1 at the current sample.
/// Ĉ receives the backward-difference rate, since the loop is position-only.
template <typename Scalar>
ModelSampleTpl<Scalar> sample_model(
    const ModelEstimateTpl<Scalar> &model,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> &q,
    const AdmittanceStateTpl<Scalar> &state,
    const AdmittanceGainsTpl<Scalar> &g) {
  using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = q.size();
  ModelSampleTpl<Scalar> m;
  m.M = model.mass_fn(q);
  m.C = model.coriolis_fn(q, (q - state.q_prev) / g.h);
  m.G = model.gravity_fn(q);
  m.Mr = model.robust_mass_fn ? model.robust_mass_fn(q) : m.M;
  if (m.M.rows() != n || m.M.cols() != n || m.C.rows() != n ||
      m.C.cols() != n || m.G.size() != n || m.Mr.rows() != n ||
      m.Mr.cols() != n)
    throw DimensionError("model estimate dimensions do not match q");
  m.K1 = g.k1.structured ? MatrixX(-m.C + g.msta.gamma1 * m.M)
                         : MatrixX(g.k1.k1 * MatrixX::Identity(n, n));
  return m;
}

/// u*_x = (Mx + Bx h)⁻¹(Mx q̇_{x,k−1} + h(f_c + f_d)),  q*_x = q_{x,k−1} + h u*_x.
template <typename Scalar, typename D1, typename D2>
ProxyPredictionTpl<Scalar>
proxy_predict(const AdmittanceStateTpl<Scalar> &state,
              const Eigen::MatrixBase<D1> &fc, const Eigen::MatrixBase<D2> &fd,
              const AdmittanceGainsTpl<Scalar> &g) {
  using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index n = g.dim();
  if (fc.size() != n || fd.size() != n || state.qx_prev.size() != n)
    throw DimensionError("proxy_predict: size mismatch");
  const MatrixX A = g.Mx + g.h * g.Bx;
  const VectorX rhs = g.Mx * state.qxd_prev + g.h * (fc + fd);
  ProxyPredictionTpl<Scalar> out;
  out.ux_star = detail::checked_solve<Scalar>(A, rhs, "proxy_predict");
  out.qx_star = state.qx_prev + g.h * out.ux_star;
  return out;
}

/// q_e = q*_x − q, q̇_e = (q_e − (q_x,prev − q_prev))/h, s = q̇_e + Λ q_e.
template <typename Scalar, typename D1, typename D2>
SlidingTpl<Scalar> sliding_variable(const Eigen::MatrixBase<D1> &qx_star,
                                    const Eigen::MatrixBase<D2> &q,
                                    const AdmittanceStateTpl<Scalar> &state,
                                    const AdmittanceGainsTpl<Scalar> &g) {
  if (qx_star.size() != q.size() || state.qe_prev.size() != q.size())
    throw DimensionError("sliding_variable: size mismatch");
  SlidingTpl<Scalar> out;
  out.qe = qx_star - q;
  out.qed = (out.qe - state.qe_prev) / g.h;
  out.s = out.qed + g.Lambda * out.qe;
  return out;
}

/// Inner-loop candidate from pre-sampled model matrices.
template <typename Scalar>
InnerCandidateTpl<Scalar> inner_loop_candidate(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> &qx_star,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> &q,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> &u_s,
    const AdmittanceStateTpl<Scalar> &state, const ModelSampleTpl<Scalar> &m,
    const AdmittanceGainsTpl<Scalar> &g) {
  using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Scalar h = g.h;
  const MatrixX B = m.M * g.Lambda + m.K1;
  const MatrixX Bh = B + m.C;
  const MatrixX K = (m.C + m.K1) * g.Lambda;
  const MatrixX Kh = Bh / h + K;
  InnerCandidateTpl<Scalar> out;
  out.D = m.M / (h * h) + Kh;
  const VectorX phi_a =
      ((m.M + m.C * h) * q + B * state.q_prev * h) / (h * h) + m.G + m.Mr * u_s;
  const VectorX phi_b =
      m.M * (state.qx_prev + h * state.qxd_prev) / (h * h) + Bh * state.qx_prev / h;
  out.q1_star =
      q + detail::checked_solve<Scalar>(out.D, VectorX(phi_b - phi_a),
                                        "inner_loop_candidate");
  out.tau_star = out.D * (qx_star - out.q1_star);
  return out;
}

/// Overload evaluating the model estimate at q.
template <typename Scalar>
InnerCandidateTpl<Scalar> inner_loop_candidate(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> &qx_star,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> &q,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> &u_s,
    const AdmittanceStateTpl<Scalar> &state,
    const ModelEstimateTpl<Scalar> &model,
    const AdmittanceGainsTpl<Scalar> &g) {
  return inner_loop_candidate<Scalar>(qx_star, q, u_s, state,
                                      sample_model(model, q, state, g), g);
}

/// beta for the decoupled and scalar paths. Structured k1 gives
/// 1 + h gamma1; scalar k1 on one joint gives 1 + h(k1 + Ĉ)/M_r;
/// otherwise 1.
template <typename Scalar>
Scalar msta_beta(const ModelSampleTpl<Scalar> &m,
                 const AdmittanceGainsTpl<Scalar> &g) {
  if (g.k1.structured)
    return Scalar(1) + g.h * g.msta.gamma1;
  if (m.M.rows() == 1)
    return std::max(Scalar(1),
                    Scalar(1) + g.h * (g.k1.k1 + m.C(0, 0)) / m.Mr(0, 0));
  return Scalar(1);
}

/// Robust term for the configured discretization.
template <typename Scalar>
MstaStepTpl<Scalar>
robust_term(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> &s,
            const ModelSampleTpl<Scalar> &m,
            const MstaStateTpl<Scalar> &state,
            const AdmittanceGainsTpl<Scalar> &g) {
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  switch (g.us_mode) {
  case UsMode::Explicit:
    return msta_explicit_step(s, state, g.msta, g.h);
  case UsMode::ImplicitVector:
    return msta_implicit_step(s, m.Mr,
                              msta_system_matrix(m.Mr, m.C, m.K1, g.h), g.msta,
                              g.h, state);
  case UsMode::ImplicitDecoupled: {
    auto gains = g.msta;
    gains.gamma1 = (msta_beta(m, g) - Scalar(1)) / g.h;
    return msta_implicit_decoupled_step(s, gains, g.h, state);
  }
  case UsMode::ScalarImplicit: {
    const Scalar beta = msta_beta(m, g);
    MstaStepTpl<Scalar> out;
    const Eigen::Index n = s.size();
    out.u_s = VectorX(n);
    out.state.v = VectorX(n);
    out.diag.shat = VectorX::Zero(n);
    out.diag.m2 = VectorX(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto r = sta_scalar_implicit_step(s[i], g.msta, beta, g.h, state.v[i]);
      out.u_s[i] = r.u_s;
      out.state.v[i] = r.v;
      out.diag.m2[i] = r.phi2;
      // βŝ = s − h(k2 phi1) on each channel.
      out.diag.shat[i] = (s[i] - g.h * g.msta.k2 * r.phi1) / beta;
    }
    return out;
  }
  }
  throw ParameterError("unknown u_s mode");
}

/// One controller period of the set-valued admittance controller.
template <typename Scalar>
AdmittanceStepTpl<Scalar>
admittance_step(const AdmittanceStateTpl<Scalar> &state,
                const MeasurementTpl<Scalar> &meas,
                const ModelEstimateTpl<Scalar> &model,
                const AdmittanceGainsTpl<Scalar> &g) {
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index n = g.dim();
  if (meas.q.size() != n)
    throw DimensionError("admittance_step: measurement size mismatch");
  const auto m = sample_model(model, meas.q, state, g);
  const auto pred = proxy_predict(state, meas.fc, meas.fd, g);
  const auto sl = sliding_variable(pred.qx_star, meas.q, state, g);
  auto us = robust_term(sl.s, m, state.msta_state, g);
  const auto cand = inner_loop_candidate<Scalar>(pred.qx_star, meas.q, us.u_s,
                                                 state, m, g);

  AdmittanceStepTpl<Scalar> out;
  out.tau = project_box(cand.tau_star, g.box);
  auto &d = out.diag;
  d.saturated = (out.tau.array() != cand.tau_star.array()).matrix();
  if (d.saturated.any()) {
    const VectorX qx = cand.q1_star + detail::checked_solve<Scalar>(
                                          cand.D, out.tau, "admittance_step");
    out.state.qx_prev = qx;
    d.lambda_vi_residual = variational_residual(
        cand.tau_star, out.tau, g.box, box_probe_grid<Scalar>(n, n <= 6 ? 3 : 2));
  } else {
    // D⁻¹τ* + q*₁ = q*_x exactly.
    out.state.qx_prev = pred.qx_star;
    d.lambda_vi_residual = Scalar(0);
  }
  out.state.qxd_prev = (out.state.qx_prev - state.qx_prev) / g.h;
  out.state.q_prev = meas.q;
  // Backward difference of q_e is taken against the projected proxy.
  out.state.qe_prev = out.state.qx_prev - meas.q;
  out.state.msta_state = std::move(us.state);

  d.tau_star = cand.tau_star;
  d.tau = out.tau;
  d.qx_star = pred.qx_star;
  d.q1_star = cand.q1_star;
  d.s = sl.s;
  d.qe = sl.qe;
  d.qed = sl.qed;
  d.u_s = std::move(us.u_s);
  d.solver = std::move(us.diag);
  return out;
}

/// Naive contrast controller: same proxy, PD position loop with hard clamp,
/// no projection feedback into the proxy.
template <typename Scalar>
AdmittanceStepTpl<Scalar>
baseline_naive_step(const AdmittanceStateTpl<Scalar> &state,
                    const MeasurementTpl<Scalar> &meas,
                    const ModelEstimateTpl<Scalar> &model,
                    const PdGainsTpl<Scalar> &pd,
                    const AdmittanceGainsTpl<Scalar> &g) {
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index n = g.dim();
  if (meas.q.size() != n)
    throw DimensionError("baseline_naive_step: measurement size mismatch");
  const auto pred = proxy_predict(state, meas.fc, meas.fd, g);
  const auto sl = sliding_variable(pred.qx_star, meas.q, state, g);
  const VectorX G = model.gravity_fn(meas.q);
  const VectorX tau_star = pd.Kp * sl.qe + pd.Kd * sl.qed + G;

  AdmittanceStepTpl<Scalar> out;
  out.tau = project_box(tau_star, g.box);
  out.state = state;
  out.state.qx_prev = pred.qx_star;
  out.state.qxd_prev = pred.ux_star;
  out.state.q_prev = meas.q;
  out.state.qe_prev = sl.qe;
  auto &d = out.diag;
  d.tau_star = tau_star;
  d.tau = out.tau;
  d.qx_star = pred.qx_star;
  d.q1_star = pred.qx_star;
  d.s = sl.s;
  d.qe = sl.qe;
  d.qed = sl.qed;
  d.u_s = VectorX::Zero(n);
  d.saturated = (out.tau.array() != tau_star.array()).matrix();
  d.lambda_vi_residual = Scalar(0);
  d.solver.shat = VectorX::Zero(n);
  d.solver.m2 = VectorX::Zero(n);
  return out;
}

} // namespace nsadm
