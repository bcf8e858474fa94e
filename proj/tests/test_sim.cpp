#include <gtest/gtest.h>

#include "nsadm/errors.hpp"
#include "nsadm/scenario_io.hpp"
#include "nsadm/sim.hpp"

using namespace nsadm;
using Vec = Eigen::VectorXd;

namespace {

Trace synthetic(const std::vector<double> &fy, double h) {
  Trace tr;
  tr.dof = 1;
  for (std::size_t k = 0; k < fy.size(); ++k) {
    TraceRow r;
    r.t = static_cast<double>(k) * h;
    r.q = r.qd = r.qx = r.qxd = r.tau = r.tau_star = r.fc_joint = r.s = r.v = r.u_s = Vec::Zero(1);
    r.saturated = Eigen::Matrix<bool, Eigen::Dynamic, 1>::Constant(1, false);
    r.fc_cart = {0, fy[k]};
    r.fd_cart = {0, -2};
    r.contact = fy[k] > 0;
    tr.rows.push_back(r);
  }
  return tr;
}

} // namespace

TEST(Presets, ParameterValues) {
  EXPECT_DOUBLE_EQ(preset("fig3_one_dof").h, 0.001);
  EXPECT_DOUBLE_EQ(preset("linmotor_steps").h, 0.004);
  const auto f5 = preset("fig5_two_dof");
  const auto lim = f5.plant.build().torque_limits.limits;
  EXPECT_EQ(lim, (Vec{{3, 4}}));
  const auto lm = preset("linmotor_steps");
  EXPECT_DOUBLE_EQ(lm.controller.Mx[0], 0.2);
  EXPECT_DOUBLE_EQ(lm.controller.Bx[0], 4);
  EXPECT_DOUBLE_EQ(lm.controller.k1.k1, 60);
  EXPECT_DOUBLE_EQ(lm.controller.msta.k2, 22.25);
  EXPECT_DOUBLE_EQ(lm.controller.msta.k3, 242);
  EXPECT_DOUBLE_EQ(lm.plant.linear_motor.F, 12.5);
  EXPECT_EQ(preset_names().size(), 4u);
  EXPECT_THROW(preset("nope"), ConfigError);
  try {
    preset("nope");
  } catch (const ConfigError &e) {
    EXPECT_NE(std::string(e.what()).find("fig3_one_dof"), std::string::npos);
  }
}

TEST(RunScenario, FreeSpaceEquilibrium) {
  Scenario sc = preset("fig3_one_dof");
  sc.env.ys = -10;
  sc.fd_schedule = {{0, 0, 0}};
  sc.duration = 1.0;
  const auto tr = run_scenario(sc);
  ASSERT_EQ(tr.rows.size(), 1000u);
  for (const auto &r : tr.rows)
    ASSERT_LE(std::abs(r.q[0] - sc.q0[0]), 1e-9);
  const auto m = compute_metrics(tr, sc);
  EXPECT_TRUE(std::isnan(m.steady_force_err));
}

TEST(RunScenario, Fig3SteadyContact) {
  const Scenario sc = preset("fig3_one_dof");
  const auto tr = run_scenario(sc);
  ASSERT_EQ(tr.rows.size(), 5000u);
  const auto m = compute_metrics(tr, sc);
  EXPECT_LE(m.steady_force_err, 0.05);
  EXPECT_EQ(m.torque_violations, 0);
  EXPECT_EQ(m.rebound_count, 0);
  double pen = 0;
  int n = 0;
  const auto plant = sc.plant.build();
  for (const auto &r : tr.rows) {
    EXPECT_LE(std::abs(r.tau[0]), 3.0);
    if (r.t > 1.5) {
      EXPECT_TRUE(r.contact);
    }
    if (r.t >= 4.0) {
      pen += sc.env.ys - plant.ee_pose_fn(r.q).y();
      ++n;
    }
  }
  // f_y = k_s · pen, so 2 N over 2000 N/m.
  EXPECT_NEAR(pen / n, 1.0e-3, 5e-5);
}

TEST(RunScenario, HalvingStepKeepsSteadyForce) {
  Scenario sc = preset("fig3_one_dof");
  const double a = compute_metrics(run_scenario(sc), sc).steady_force_mean;
  sc.h /= 2;
  sc.dt_sub /= 2;
  const double b = compute_metrics(run_scenario(sc), sc).steady_force_mean;
  EXPECT_LE(std::abs(a - b) / a, 0.01);
}

TEST(RunScenario, BitIdenticalReruns) {
  const Scenario sc = preset("fig5_two_dof");
  const auto a = run_scenario(sc), b = run_scenario(sc);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    ASSERT_EQ(a.rows[k].q, b.rows[k].q);
    ASSERT_EQ(a.rows[k].tau, b.rows[k].tau);
    ASSERT_EQ(a.rows[k].qx, b.rows[k].qx);
    ASSERT_EQ(a.rows[k].fc_cart, b.rows[k].fc_cart);
  }
}

TEST(RunScenario, BlowUpReportsStep) {
  Scenario sc = preset("fig3_one_dof");
  sc.plant.one_dof.sin_amp = 2.0;  // inertia turns negative along the path
  sc.q0 = Vec::Constant(1, -1.3);
  sc.env.ys = -10;
  try {
    run_scenario(sc);
    FAIL() << "expected a failure";
  } catch (const SimulationError &e) {
    EXPECT_GE(e.step, 0);
  } catch (const std::invalid_argument &) {
    SUCCEED();
  }
}

TEST(Metrics, PerfectTracking) {
  const Scenario sc = preset("fig3_one_dof");
  const auto m = compute_metrics(synthetic(std::vector<double>(3000, 2.0), 1e-3), sc);
  EXPECT_DOUBLE_EQ(m.steady_force_err, 0.0);
  EXPECT_EQ(m.rebound_count, 0);
  EXPECT_NEAR(m.settle_time, 0.0, 1e-12);
}

TEST(Metrics, OneContactLossGap) {
  const Scenario sc = preset("fig3_one_dof");
  std::vector<double> fy(3000, 2.0);
  for (int k = 1000; k < 1100; ++k)
    fy[k] = 0;
  EXPECT_EQ(compute_metrics(synthetic(fy, 1e-3), sc).rebound_count, 1);
  // A loss before contact was sustained for 0.2 s is not a rebound.
  std::vector<double> early(3000, 2.0);
  for (int k = 100; k < 150; ++k)
    early[k] = 0;
  EXPECT_EQ(compute_metrics(synthetic(early, 1e-3), sc).rebound_count, 0);
}

TEST(Metrics, SettleTimeDefinition) {
  const Scenario sc = preset("fig3_one_dof");
  std::vector<double> fy(3000, 2.0);
  for (int k = 0; k < 700; ++k)
    fy[k] = 1.0;  // 50% error until 0.7 s
  EXPECT_NEAR(compute_metrics(synthetic(fy, 1e-3), sc).settle_time, 0.7, 1e-9);
}

TEST(Sweep, StiffnessRowsRespectTorqueBox) {
  const auto rows = sweep(preset("fig3_one_dof"), "env.ks_N_per_m", {500, 2e3, 1e4});
  ASSERT_EQ(rows.size(), 3u);
  for (const auto &r : rows)
    EXPECT_EQ(r.metrics.torque_violations, 0);
  EXPECT_THROW(sweep(preset("fig3_one_dof"), "env.nope", {1}), ConfigError);
}

TEST(Sweep, LinearMotorCommandLevels) {
  Scenario sc = preset("linmotor_steps");
  sc.duration = 3.0;
  const auto rows = sweep(sc, "fd_schedule.0.fy_N", {-1.5, -2.0, -2.5});
  for (const auto &r : rows) {
    EXPECT_LE(r.metrics.steady_force_err, 0.05) << r.value;
    EXPECT_EQ(r.metrics.torque_violations, 0);
  }
}

TEST(Sweep, ThreadCountIsDeterministic) {
  const auto a = sweep(preset("fig3_one_dof"), "env.ks_N_per_m", {1e3, 3e3}, 1);
  const auto b = sweep(preset("fig3_one_dof"), "env.ks_N_per_m", {1e3, 3e3}, 2);
  for (std::size_t i = 0; i < a.size(); ++i)
    EXPECT_EQ(a[i].metrics.steady_force_mean, b[i].metrics.steady_force_mean);
}

TEST(ScenarioJson, RoundTripAndOverrides) {
  for (const auto &name : preset_names()) {
    if (name == "msta_bench")
      continue;
    const Scenario sc = preset(name);
    const auto j = scenario_to_json(sc);
    EXPECT_EQ(scenario_to_json(scenario_from_json(j)), j) << name;
  }
  auto j = scenario_to_json(preset("fig3_one_dof"));
  apply_override(j, "env.ks_N_per_m=10000");
  EXPECT_DOUBLE_EQ(scenario_from_json(j).env.ks, 1e4);
  apply_override(j, "controller.us_mode=explicit");
  EXPECT_EQ(scenario_from_json(j).controller.us_mode, UsMode::Explicit);
  EXPECT_THROW(apply_override(j, "env.nope=1"), ConfigError);
  EXPECT_THROW(apply_override(j, "env.ks_N_per_m=\"soft\""), ConfigError);
  EXPECT_THROW(apply_override(j, "novalue"), ConfigError);
  auto bad = j;
  bad["unknown_key"] = 1;
  EXPECT_THROW(scenario_from_json(bad), ConfigError);
  auto neg = scenario_to_json(preset("fig3_one_dof"));
  apply_override(neg, "duration_s=-1");
  EXPECT_ANY_THROW(scenario_from_json(neg));
}

TEST(BenchJson, RoundTrip) {
  const auto j = bench_to_json(bench_preset());
  EXPECT_TRUE(is_bench_document(j));
  EXPECT_EQ(bench_to_json(bench_from_json(j)), j);
}

TEST(Bench, ImplicitSuppressesChattering) {
  auto b = bench_preset();
  b.us_mode = UsMode::Explicit;
  const auto ex = bench_metrics(run_bench(b), b);
  b.us_mode = UsMode::ScalarImplicit;
  const auto im = bench_metrics(run_bench(b), b);
  EXPECT_LE(im.chattering_index, 0.1 * ex.chattering_index);
  EXPECT_LE(im.steady_s_max, 2 * b.h * b.h * b.delta3());
}
