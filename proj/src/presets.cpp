#include <cmath>

#include "nsadm/errors.hpp"
#include "nsadm/sim.hpp"

namespace nsadm {

namespace {

Scenario fig3_one_dof() {
  Scenario sc;
  sc.name = "fig3_one_dof";
  sc.plant.kind = PlantKind::OneDof;
  // Motion in the horizontal plane: gravity torque (12.3 N·m) would exceed
  // the 3 N·m torque box at the contact pose.
  sc.plant.one_dof.g = 0.0;
  sc.q0 = Eigen::VectorXd::Zero(1);
  sc.qd0 = Eigen::VectorXd::Zero(1);
  sc.env.ks = 2e3;
  sc.env.ys = -sc.plant.one_dof.l1 * std::sin(0.1);
  sc.env.mu_fric = 0.1;
  auto &c = sc.controller;
  c.kind = ControllerKind::Proposed;
  c.us_mode = UsMode::ScalarImplicit;
  c.Mx = Eigen::VectorXd::Constant(1, 0.3);
  c.Bx = Eigen::VectorXd::Constant(1, 2.0);
  c.Lambda = 10;
  c.k1 = {false, 30.0};
  c.msta.k2 = 11.6;
  c.msta.k3 = 66;
  c.msta.k4 = 0;
  c.pd = {300.0, 31.0};
  sc.estimate.M_hat = Eigen::VectorXd::Constant(1, 0.1);
  sc.estimate.C_hat = Eigen::VectorXd::Zero(1);
  sc.estimate.gravity = GravityEstimate::None;
  // The rough M̂ enters the feedforward only; M(q) u_s uses the arm inertia.
  sc.estimate.robust = RobustInertia::Plant;
  sc.fd_schedule = {{0.0, 0.0, -2.0}};
  sc.approach.mode = ApproachMode::None;
  sc.duration = 5.0;
  sc.h = 1e-3;
  sc.dt_sub = 1e-5;
  return sc;
}

Scenario fig5_two_dof() {
  Scenario sc;
  sc.name = "fig5_two_dof";
  sc.plant.kind = PlantKind::TwoLink;
  sc.plant.two_link.g = 0.0;
  sc.q0 = Eigen::Vector2d(0.5, M_PI / 2);
  sc.qd0 = Eigen::VectorXd::Zero(2);
  const Eigen::Vector2d p0 = sc.plant.build().ee_pose_fn(sc.q0);
  sc.env.ks = 2e3;
  sc.env.ys = p0.y() - 0.05;
  sc.env.mu_fric = 0.1;
  auto &c = sc.controller;
  c.kind = ControllerKind::Proposed;
  c.us_mode = UsMode::Explicit;
  c.Mx = Eigen::VectorXd::Constant(2, 0.5);
  c.Bx = Eigen::VectorXd::Constant(2, 1.0);
  c.Lambda = 10;
  c.k1 = {false, 30.0};
  c.msta.k2 = 11.6;
  c.msta.k3 = 66;
  c.msta.k4 = 0;
  c.pd = {300.0, 31.0};
  sc.estimate.M_hat = Eigen::VectorXd::Constant(2, 0.2);
  sc.estimate.C_hat = Eigen::VectorXd::Constant(2, 20.0);
  sc.estimate.gravity = GravityEstimate::None;
  sc.estimate.robust = RobustInertia::Plant;
  sc.fd_schedule = {{0.0, 0.0, -2.0}};
  sc.approach.mode = ApproachMode::None;
  sc.duration = 5.0;
  sc.h = 1e-3;
  sc.dt_sub = 1e-5;
  return sc;
}

Scenario linmotor_steps() {
  Scenario sc;
  sc.name = "linmotor_steps";
  sc.plant.kind = PlantKind::LinearMotor;
  sc.q0 = Eigen::VectorXd::Zero(1);
  sc.qd0 = Eigen::VectorXd::Constant(1, -0.04);
  sc.env.ks = 2.5e3;
  sc.env.ys = -0.002;
  sc.env.mu_fric = 0.0;
  auto &c = sc.controller;
  c.kind = ControllerKind::Proposed;
  c.us_mode = UsMode::ScalarImplicit;
  c.Mx = Eigen::VectorXd::Constant(1, 0.2);
  c.Bx = Eigen::VectorXd::Constant(1, 4.0);
  c.Lambda = 10;
  c.k1 = {false, 60.0};
  c.msta.k2 = 22.25;
  c.msta.k3 = 242;
  c.msta.k4 = 0;
  c.pd = {300.0, 31.0};
  sc.estimate.M_hat = Eigen::VectorXd::Constant(1, 0.22);
  sc.estimate.C_hat = Eigen::VectorXd::Zero(1);
  sc.estimate.gravity = GravityEstimate::None;
  sc.estimate.robust = RobustInertia::Plant;
  sc.fd_schedule = {{0.0, 0.0, -1.5}, {3.0, 0.0, -2.0}, {6.0, 0.0, -2.5}};
  sc.approach = {ApproachMode::VelocityServo, 0.04, 20.0, 200.0};
  sc.duration = 9.0;
  sc.h = 4e-3;
  sc.dt_sub = 1e-5;
  return sc;
}

} // namespace

std::vector<std::string> preset_names() {
  return {"fig3_one_dof", "fig5_two_dof", "linmotor_steps", "msta_bench"};
}

std::map<std::string, Scenario> presets() {
  return {{"fig3_one_dof", fig3_one_dof()},
          {"fig5_two_dof", fig5_two_dof()},
          {"linmotor_steps", linmotor_steps()}};
}

Scenario preset(const std::string &name) {
  if (name == "fig3_one_dof")
    return fig3_one_dof();
  if (name == "fig5_two_dof")
    return fig5_two_dof();
  if (name == "linmotor_steps")
    return linmotor_steps();
  std::string list;
  for (const auto &n : preset_names())
    list += (list.empty() ? "" : ", ") + n;
  if (name == "msta_bench")
    throw ConfigError("'msta_bench' is a benchmark preset; use bench_preset()");
  throw ConfigError("unknown preset '" + name + "' (available: " + list + ")");
}

std::vector<double> linmotor_stiffness_levels() { return {5e3, 2.5e3, 1e3}; }

BenchScenario bench_preset() { return BenchScenario{}; }

} // namespace nsadm
