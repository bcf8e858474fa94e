/// @file
/// @brief Simulated plants (1-DoF arm, two-link planar arm, linear motor),
///        the unilateral spring surface with Coulomb friction, and the
///        zero-order-hold substep integrator.
#pragma once

#include <Eigen/Core>

#include <functional>

#include "nsadm/setvalued.hpp"

namespace nsadm {

struct EnvironmentModel {
  /// Surface stiffness, N/m.
  double ks{2000};
  /// Surface height, m.
  double ys{0};
  /// Coulomb coefficient.
  double mu_fric{0.1};

  void validate() const;
};

struct ContactWrench {
  double fx{0};
  double fy{0};
  Eigen::Vector2d vec() const { return {fx, fy}; }
};

struct PlantState {
  Eigen::VectorXd q;
  Eigen::VectorXd qd;
};

/// Unmeasured joint torque f_e(t, state); empty means zero.
struct DisturbanceModel {
  std::function<Eigen::VectorXd(double, const PlantState &)> fe_fn;

  Eigen::VectorXd eval(double t, const PlantState &x) const {
    return fe_fn ? fe_fn(t, x) : Eigen::VectorXd::Zero(x.q.size());
  }
};

/// True plant: M(q) q̈ + C(q, q̇) q̇ + G(q) = κτ + F_f(q̇) + f_c + f_e.
struct ManipulatorModel {
  int dof{0};
  std::function<Eigen::MatrixXd(const Eigen::VectorXd &)> mass_fn;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd &, const Eigen::VectorXd &)>
      coriolis_fn;
  std::function<Eigen::VectorXd(const Eigen::VectorXd &)> gravity_fn;
  std::function<Eigen::Vector2d(const Eigen::VectorXd &)> ee_pose_fn;
  /// 2 x dof map from joint rates to Cartesian end-effector velocity.
  std::function<Eigen::MatrixXd(const Eigen::VectorXd &)> jacobian_fn;
  /// Joint friction torque; empty means frictionless joints.
  std::function<Eigen::VectorXd(const Eigen::VectorXd &)> friction_fn;
  /// Driver gain κ on the commanded input.
  double input_gain{1.0};
  BoxConstraint torque_limits;
};

struct OneDofParams {
  double m1{5.0};
  double l1{0.5};
  double lc1{0.25};
  /// Amplitude of the sin(q) inertia perturbation.
  double sin_amp{0.2};
  /// Amplitude of C = c_amp cos(q).
  double c_amp{0.1};
  double g{9.81};
  double F{3.0};
};

struct TwoLinkParams {
  double m1{6.0}, m2{9.0};
  double l1{0.4}, l2{0.6};
  double lc1{0.2}, lc2{0.3};
  double J1{0.32}, J2{1.08};
  double g{9.81};
  double F1{3.0}, F2{4.0};
};

struct LinearMotorParams {
  double M{0.25};
  double C{1.0};
  double kappa{1.0};
  double coulomb{1.0};
  double viscous{5.0};
  double g{9.81};
  double F{12.5};
};

ManipulatorModel make_one_dof(const OneDofParams &p);
ManipulatorModel make_two_link(const TwoLinkParams &p);
ManipulatorModel make_linear_motor(const LinearMotorParams &p);

/// f_y = max(0, k_s (y_s − y)), f_x = −μ f_y sign0(ẋ).
ContactWrench contact_wrench(const Eigen::Vector2d &ee_pos,
                             const Eigen::Vector2d &ee_vel,
                             const EnvironmentModel &env);

/// Contact wrench at the current plant state.
ContactWrench contact_wrench(const ManipulatorModel &model, const PlantState &x,
                             const EnvironmentModel &env);

/// f_c = J(q)ᵀ w.
Eigen::VectorXd joint_contact_torque(const ManipulatorModel &model,
                                     const Eigen::VectorXd &q,
                                     const Eigen::Vector2d &wrench);

/// q̈ = M⁻¹(κτ + f_c + f_e + F_f − C q̇ − G).
Eigen::VectorXd forward_dynamics(const ManipulatorModel &model,
                                 const PlantState &x,
                                 const Eigen::VectorXd &tau,
                                 const Eigen::VectorXd &fc,
                                 const Eigen::VectorXd &fe);

/// n_sub semi-implicit Euler substeps under a held input; the contact wrench
/// and disturbance are re-evaluated every substep. Throws SimulationError
/// (step −1) on a non-finite state.
PlantState integrate_substep(const ManipulatorModel &model, PlantState x,
                             const Eigen::VectorXd &tau_held,
                             const EnvironmentModel &env,
                             const DisturbanceModel &disturbance, double t,
                             double dt_sub, int n_sub);

/// ½ q̇ᵀ M q̇.
double kinetic_energy(const ManipulatorModel &model, const PlantState &x);

} // namespace nsadm
