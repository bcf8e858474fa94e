/// @file
/// @brief Single-valued nonsmooth primitives: saturation, sign, box
///        projection and the proximal map of a‖x‖ + (b/2)‖x‖².
#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "nsadm/errors.hpp"

namespace nsadm {

template <typename Scalar> Scalar sat(Scalar z) {
  if (z > Scalar(1))
    return Scalar(1);
  if (z < Scalar(-1))
    return Scalar(-1);
  return z;
}

/// Sign with sign0(0) = 0.
template <typename Scalar> Scalar sign0(Scalar z) {
  if (z > Scalar(0))
    return Scalar(1);
  if (z < Scalar(0))
    return Scalar(-1);
  return Scalar(0);
}

/// Per-joint torque limits F = diag(F_1, ..., F_n).
template <typename _Scalar> struct BoxConstraintTpl {
  using Scalar = _Scalar;
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  BoxConstraintTpl() = default;
  explicit BoxConstraintTpl(VectorX limits_) : limits(std::move(limits_)) {
    validate();
  }

  void validate() const {
    for (Eigen::Index i = 0; i < limits.size(); ++i)
      if (!(limits[i] > Scalar(0)) || !std::isfinite(double(limits[i])))
        throw ParameterError("box limit " + std::to_string(i) +
                             " must be finite and > 0");
  }

  Eigen::Index dim() const { return limits.size(); }

  VectorX limits;
};

using BoxConstraint = BoxConstraintTpl<double>;

/// Weights of f(x) = a‖x‖ + (b/2)‖x‖².
template <typename _Scalar> struct NormQuadWeightsTpl {
  using Scalar = _Scalar;
  Scalar a{0};
  Scalar b{0};

  void validate() const {
    if (!(a >= Scalar(0)) || !(b >= Scalar(0)))
      throw ParameterError("norm-quad weights must be nonnegative");
  }
};

using NormQuadWeights = NormQuadWeightsTpl<double>;

/// Entrywise clamp to [-F_i, F_i], i.e. F Proj(𝓕; F⁻¹y) with 𝓕 = [-1,1]ⁿ.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>
project_box(const Eigen::MatrixBase<Derived> &y,
            const BoxConstraintTpl<typename Derived::Scalar> &box) {
  if (y.size() != box.dim())
    throw DimensionError("project_box: vector has size " +
                         std::to_string(y.size()) + ", box has " +
                         std::to_string(box.dim()));
  return y.cwiseMax(-box.limits).cwiseMin(box.limits);
}

/// argmin_x (1/(2 index))‖x − z‖² + a‖x‖ + (b/2)‖x‖².
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>
prox_norm_quad(const Eigen::MatrixBase<Derived> &z,
               typename Derived::Scalar index,
               const NormQuadWeightsTpl<typename Derived::Scalar> &w) {
  using Scalar = typename Derived::Scalar;
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (!(index > Scalar(0)))
    throw ParameterError("prox_norm_quad: index must be > 0");
  w.validate();
  const Scalar nz = z.norm();
  if (nz <= index * w.a)
    return VectorX::Zero(z.size());
  const Scalar scale = (nz - index * w.a) / ((Scalar(1) + index * w.b) * nz);
  return scale * z;
}

/// Largest value of ⟨y* − y, p − F⁻¹y⟩ over the probe set. Nonpositive for
/// a correct projection y of y*.
template <typename D1, typename D2>
typename D1::Scalar variational_residual(
    const Eigen::MatrixBase<D1> &y_star, const Eigen::MatrixBase<D2> &y_proj,
    const BoxConstraintTpl<typename D1::Scalar> &box,
    const std::vector<Eigen::Matrix<typename D1::Scalar, Eigen::Dynamic, 1>>
        &probes) {
  using Scalar = typename D1::Scalar;
  const Eigen::Index n = box.dim();
  if (y_star.size() != n || y_proj.size() != n)
    throw DimensionError("variational_residual: size mismatch");
  const auto y_scaled = y_proj.cwiseQuotient(box.limits).eval();
  const auto gap = (y_star - y_proj).eval();
  Scalar best = -std::numeric_limits<Scalar>::infinity();
  for (const auto &p : probes) {
    if (p.size() != n)
      throw DimensionError("variational_residual: probe size mismatch");
    if ((p.array().abs() > Scalar(1)).any())
      throw ParameterError("variational_residual: probe outside [-1,1]^n");
    best = std::max(best, gap.dot(p - y_scaled));
  }
  return best;
}

/// Probe set for variational_residual: the corners and axis points of
/// [-1,1]ⁿ plus the scaled projection itself.
template <typename Scalar>
std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>
box_probe_grid(Eigen::Index n, int levels = 3) {
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  std::vector<VectorX> out;
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  const auto at = [&](int k) {
    return levels == 1 ? Scalar(0)
                       : Scalar(-1) + Scalar(2) * Scalar(k) / Scalar(levels - 1);
  };
  while (true) {
    VectorX p(n);
    for (Eigen::Index i = 0; i < n; ++i)
      p[i] = at(idx[static_cast<std::size_t>(i)]);
    out.push_back(p);
    Eigen::Index i = 0;
    for (; i < n; ++i) {
      auto &d = idx[static_cast<std::size_t>(i)];
      if (++d < levels)
        break;
      d = 0;
    }
    if (i == n)
      break;
  }
  return out;
}

} // namespace nsadm
