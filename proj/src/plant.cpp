#include "nsadm/plant.hpp"

#include <Eigen/Cholesky>

#include <cmath>

#include "nsadm/errors.hpp"

namespace nsadm {

void EnvironmentModel::validate() const {
  if (!(ks >= 0))
    throw ParameterError("environment: ks must be >= 0");
  if (!(mu_fric >= 0))
    throw ParameterError("environment: mu_fric must be >= 0");
  if (!std::isfinite(ys))
    throw ParameterError("environment: ys must be finite");
}

ManipulatorModel make_one_dof(const OneDofParams &p) {
  if (!(p.m1 > 0) || !(p.l1 > 0))
    throw ParameterError("one-dof: m1 and l1 must be > 0");
  ManipulatorModel m;
  m.dof = 1;
  const double Js = p.m1 * p.l1 * p.l1 / 3.0;
  const double M0 = Js + p.m1 * p.lc1 * p.lc1;
  m.mass_fn = [M0, a = p.sin_amp](const Eigen::VectorXd &q) {
    Eigen::MatrixXd M(1, 1);
    M(0, 0) = M0 + a * std::sin(q[0]);
    return M;
  };
  m.coriolis_fn = [c = p.c_amp](const Eigen::VectorXd &q, const Eigen::VectorXd &) {
    Eigen::MatrixXd C(1, 1);
    C(0, 0) = c * std::cos(q[0]);
    return C;
  };
  m.gravity_fn = [k = p.m1 * p.g * p.lc1](const Eigen::VectorXd &q) {
    Eigen::VectorXd G(1);
    G[0] = k * std::cos(q[0]);
    return G;
  };
  m.ee_pose_fn = [l = p.l1](const Eigen::VectorXd &q) {
    return Eigen::Vector2d(l * std::cos(q[0]), l * std::sin(q[0]));
  };
  m.jacobian_fn = [l = p.l1](const Eigen::VectorXd &q) {
    Eigen::MatrixXd J(2, 1);
    J << -l * std::sin(q[0]), l * std::cos(q[0]);
    return J;
  };
  m.torque_limits = BoxConstraint(Eigen::VectorXd::Constant(1, p.F));
  return m;
}

ManipulatorModel make_two_link(const TwoLinkParams &p) {
  if (!(p.m1 > 0) || !(p.m2 > 0) || !(p.l1 > 0) || !(p.l2 > 0) ||
      !(p.J1 >= 0) || !(p.J2 >= 0))
    throw ParameterError("two-link: masses, lengths must be > 0 and inertias >= 0");
  ManipulatorModel m;
  m.dof = 2;
  m.mass_fn = [p](const Eigen::VectorXd &q) {
    const double c2 = std::cos(q[1]);
    const double m12 = p.m2 * (p.lc2 * p.lc2 + p.l1 * p.lc2 * c2) + p.J2;
    Eigen::MatrixXd M(2, 2);
    M << p.m1 * p.lc1 * p.lc1 +
             p.m2 * (p.l1 * p.l1 + p.lc2 * p.lc2 + 2 * p.l1 * p.lc2 * c2) +
             p.J1 + p.J2,
        m12, m12, p.m2 * p.lc2 * p.lc2 + p.J2;
    return M;
  };
  m.coriolis_fn = [p](const Eigen::VectorXd &q, const Eigen::VectorXd &qd) {
    const double hc = -p.m2 * p.l1 * p.lc2 * std::sin(q[1]);
    Eigen::MatrixXd C(2, 2);
    C << hc * qd[1], hc * (qd[0] + qd[1]), -hc * qd[0], 0.0;
    return C;
  };
  m.gravity_fn = [p](const Eigen::VectorXd &q) {
    const double c1 = std::cos(q[0]);
    const double c12 = std::cos(q[0] + q[1]);
    Eigen::VectorXd G(2);
    G << (p.m1 * p.lc1 + p.m2 * p.l1) * p.g * c1 + p.m2 * p.lc2 * p.g * c12,
        p.m2 * p.lc2 * p.g * c12;
    return G;
  };
  m.ee_pose_fn = [p](const Eigen::VectorXd &q) {
    return Eigen::Vector2d(p.l1 * std::cos(q[0]) + p.l2 * std::cos(q[0] + q[1]),
                           p.l1 * std::sin(q[0]) + p.l2 * std::sin(q[0] + q[1]));
  };
  m.jacobian_fn = [p](const Eigen::VectorXd &q) {
    const double s1 = std::sin(q[0]), c1 = std::cos(q[0]);
    const double s12 = std::sin(q[0] + q[1]), c12 = std::cos(q[0] + q[1]);
    Eigen::MatrixXd J(2, 2);
    J << -p.l1 * s1 - p.l2 * s12, -p.l2 * s12, p.l1 * c1 + p.l2 * c12,
        p.l2 * c12;
    return J;
  };
  m.torque_limits = BoxConstraint(Eigen::Vector2d(p.F1, p.F2));
  return m;
}

ManipulatorModel make_linear_motor(const LinearMotorParams &p) {
  if (!(p.M > 0) || !(p.C >= 0))
    throw ParameterError("linear motor: M must be > 0 and C >= 0");
  ManipulatorModel m;
  m.dof = 1;
  m.mass_fn = [M = p.M](const Eigen::VectorXd &) {
    return Eigen::MatrixXd::Constant(1, 1, M);
  };
  m.coriolis_fn = [C = p.C](const Eigen::VectorXd &, const Eigen::VectorXd &) {
    return Eigen::MatrixXd::Constant(1, 1, C);
  };
  m.gravity_fn = [w = p.M * p.g](const Eigen::VectorXd &) {
    return Eigen::VectorXd::Constant(1, w);
  };
  m.ee_pose_fn = [](const Eigen::VectorXd &q) {
    return Eigen::Vector2d(0.0, q[0]);
  };
  m.jacobian_fn = [](const Eigen::VectorXd &) {
    Eigen::MatrixXd J(2, 1);
    J << 0.0, 1.0;
    return J;
  };
  m.friction_fn = [c = p.coulomb, b = p.viscous](const Eigen::VectorXd &qd) {
    return Eigen::VectorXd::Constant(1, -(c * sign0(qd[0]) + b * qd[0]));
  };
  m.input_gain = p.kappa;
  m.torque_limits = BoxConstraint(Eigen::VectorXd::Constant(1, p.F));
  return m;
}

ContactWrench contact_wrench(const Eigen::Vector2d &ee_pos,
                             const Eigen::Vector2d &ee_vel,
                             const EnvironmentModel &env) {
  ContactWrench w;
  w.fy = std::max(0.0, env.ks * (env.ys - ee_pos.y()));
  w.fx = w.fy > 0.0 ? -env.mu_fric * w.fy * sign0(ee_vel.x()) : 0.0;
  return w;
}

ContactWrench contact_wrench(const ManipulatorModel &model, const PlantState &x,
                             const EnvironmentModel &env) {
  const Eigen::Vector2d vel = model.jacobian_fn(x.q) * x.qd;
  return contact_wrench(model.ee_pose_fn(x.q), vel, env);
}

Eigen::VectorXd joint_contact_torque(const ManipulatorModel &model,
                                     const Eigen::VectorXd &q,
                                     const Eigen::Vector2d &wrench) {
  const Eigen::MatrixXd J = model.jacobian_fn(q);
  if (J.rows() != 2 || J.cols() != q.size())
    throw DimensionError("joint_contact_torque: Jacobian is " +
                         std::to_string(J.rows()) + "x" +
                         std::to_string(J.cols()));
  return J.transpose() * wrench;
}

Eigen::VectorXd forward_dynamics(const ManipulatorModel &model,
                                 const PlantState &x,
                                 const Eigen::VectorXd &tau,
                                 const Eigen::VectorXd &fc,
                                 const Eigen::VectorXd &fe) {
  const Eigen::Index n = model.dof;
  if (x.q.size() != n || x.qd.size() != n || tau.size() != n ||
      fc.size() != n || fe.size() != n)
    throw DimensionError("forward_dynamics: size mismatch");
  Eigen::VectorXd rhs = model.input_gain * tau + fc + fe -
                        model.coriolis_fn(x.q, x.qd) * x.qd -
                        model.gravity_fn(x.q);
  if (model.friction_fn)
    rhs += model.friction_fn(x.qd);
  const Eigen::MatrixXd M = model.mass_fn(x.q);
  if (n == 1) {
    if (!(M(0, 0) > 0))
      throw SolverError("forward_dynamics: non-positive inertia");
    return rhs / M(0, 0);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success)
    throw SolverError("forward_dynamics: mass matrix not positive definite");
  return llt.solve(rhs);
}

PlantState integrate_substep(const ManipulatorModel &model, PlantState x,
                             const Eigen::VectorXd &tau_held,
                             const EnvironmentModel &env,
                             const DisturbanceModel &disturbance, double t,
                             double dt_sub, int n_sub) {
  for (int i = 0; i < n_sub; ++i) {
    const auto w = contact_wrench(model, x, env);
    const Eigen::VectorXd fc = joint_contact_torque(model, x.q, w.vec());
    const Eigen::VectorXd fe = disturbance.eval(t + i * dt_sub, x);
    const Eigen::VectorXd qdd = forward_dynamics(model, x, tau_held, fc, fe);
    x.qd += dt_sub * qdd;
    x.q += dt_sub * x.qd;
    if (!x.q.allFinite() || !x.qd.allFinite())
      throw SimulationError("non-finite plant state", -1);
  }
  return x;
}

double kinetic_energy(const ManipulatorModel &model, const PlantState &x) {
  return 0.5 * x.qd.dot(model.mass_fn(x.q) * x.qd);
}

} // namespace nsadm
