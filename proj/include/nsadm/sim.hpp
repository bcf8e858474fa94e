/// @file
/// @brief Scenario definition, fixed-step closed-loop runner, metrics,
///        presets and parameter sweeps.
#pragma once

#include <Eigen/Core>

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "nsadm/admittance.hpp"
#include "nsadm/plant.hpp"

namespace nsadm {

enum class PlantKind { OneDof, TwoLink, LinearMotor };
enum class ControllerKind { Proposed, Naive };
enum class ApproachMode { None, VelocityServo };
enum class GravityEstimate { None, Exact };

const char *to_string(PlantKind k);
const char *to_string(ControllerKind k);
const char *to_string(ApproachMode k);
const char *to_string(GravityEstimate k);
PlantKind plant_kind_from_string(const std::string &s);
ControllerKind controller_kind_from_string(const std::string &s);
ApproachMode approach_mode_from_string(const std::string &s);
GravityEstimate gravity_estimate_from_string(const std::string &s);

struct PlantConfig {
  PlantKind kind{PlantKind::OneDof};
  OneDofParams one_dof;
  TwoLinkParams two_link;
  LinearMotorParams linear_motor;

  int dof() const { return kind == PlantKind::TwoLink ? 2 : 1; }
  ManipulatorModel build() const;
};

/// Bounded sinusoidal joint disturbance f_e,i = amplitude sin(omega t + i).
struct DisturbanceConfig {
  double amplitude{0};
  double omega{0};
  DisturbanceModel build(int dof) const;
};

struct ControllerConfig {
  ControllerKind kind{ControllerKind::Proposed};
  UsMode us_mode{UsMode::ScalarImplicit};
  /// Diagonals of Mx and Bx.
  Eigen::VectorXd Mx;
  Eigen::VectorXd Bx;
  double Lambda{10};
  K1Spec k1;
  MstaGains msta;
  PdGains pd;
};

/// Inertia weighting the robust term M u_s.
enum class RobustInertia { Estimate, Plant, Diagonal };
const char *to_string(RobustInertia k);
RobustInertia robust_inertia_from_string(const std::string &s);

/// Controller-side model: constant diagonal M̂, Ĉ; Ĝ either absent or the
/// true plant gravity. The robust term is weighted by M̂, by the plant's
/// M(q), or by a constant diagonal.
struct EstimateConfig {
  Eigen::VectorXd M_hat;
  Eigen::VectorXd C_hat;
  GravityEstimate gravity{GravityEstimate::None};
  RobustInertia robust{RobustInertia::Estimate};
  /// Used when robust == Diagonal.
  Eigen::VectorXd robust_inertia;

  ModelEstimate build(const ManipulatorModel &plant) const;
};

/// Desired Cartesian force, piecewise constant from t_s on.
struct FdSegment {
  double t_s{0};
  double fx_N{0};
  double fy_N{0};
};

struct ApproachConfig {
  ApproachMode mode{ApproachMode::None};
  /// Desired end-effector velocity along −y, m/s.
  double speed{0.04};
  double kv{20};
  double ki{200};
};

struct Scenario {
  std::string name;
  PlantConfig plant;
  Eigen::VectorXd q0;
  Eigen::VectorXd qd0;
  EnvironmentModel env;
  DisturbanceConfig disturbance;
  ControllerConfig controller;
  EstimateConfig estimate;
  std::vector<FdSegment> fd_schedule;
  ApproachConfig approach;
  double duration{5};
  double h{1e-3};
  double dt_sub{1e-5};
  unsigned seed{0};

  void validate() const;
  long steps() const;
  int substeps() const;
  Eigen::Vector2d fd_at(double t) const;
  AdmittanceGains gains(const ManipulatorModel &plant) const;
};

struct TraceRow {
  double t{0};
  Eigen::VectorXd q, qd, qx, qxd, tau, tau_star, fc_joint;
  Eigen::Vector2d fc_cart{0, 0};
  Eigen::Vector2d fd_cart{0, 0};
  Eigen::VectorXd s, v, u_s;
  Eigen::Matrix<bool, Eigen::Dynamic, 1> saturated;
  bool contact{false};
  /// False while the approach servo is active.
  bool admittance{true};
  double vi_residual{0};
};

struct Trace {
  int dof{0};
  std::vector<TraceRow> rows;
};

struct Metrics {
  double steady_force_err{std::numeric_limits<double>::quiet_NaN()};
  double steady_force_mean{std::numeric_limits<double>::quiet_NaN()};
  double steady_force_std{std::numeric_limits<double>::quiet_NaN()};
  double settle_time{std::numeric_limits<double>::quiet_NaN()};
  int rebound_count{0};
  int torque_violations{0};
  double chattering_index{0};
  double max_penetration{0};
  double first_contact_time{std::numeric_limits<double>::quiet_NaN()};
  double max_vi_residual{0};
};

Trace run_scenario(const Scenario &sc);
Metrics compute_metrics(const Trace &trace, const Scenario &sc);

/// Mean relative force error over [t0, t1) against |f_d,y| at t1⁻.
double window_force_error(const Trace &trace, const Scenario &sc, double t0,
                          double t1);

struct SweepRow {
  double value{0};
  Metrics metrics;
};

/// One metrics row per value of the dotted scenario path; runs in parallel
/// up to max_threads (0: NONSMOOTH_ADM_THREADS or hardware concurrency).
std::vector<SweepRow> sweep(const Scenario &base, const std::string &param_path,
                            const std::vector<double> &values,
                            unsigned max_threads = 0);

/// Worker count for sweeps: env override capped by hardware concurrency.
unsigned sweep_threads();

std::vector<std::string> preset_names();
/// Throws ConfigError naming the available presets.
Scenario preset(const std::string &name);
/// Surface stiffnesses (N/m, hard to soft) run by linmotor_steps sweeps.
std::vector<double> linmotor_stiffness_levels();
std::map<std::string, Scenario> presets();

// ---------------------------------------------------------------------------
// Double-integrator benchmark for the robust term alone.

/// ẍ = u + d(t), s = ẋ + Λx, u = −Λẋ − γ1 s − u_s, d = δ1 sin(ωt).
struct BenchScenario {
  BenchScenario() { msta.gamma1 = 30.0; }

  std::string name{"msta_bench"};
  UsMode us_mode{UsMode::ScalarImplicit};
  MstaGains msta;
  double Lambda{10};
  double delta1{1.0};
  double omega{10.0};
  double x0{0.1};
  double duration{4.0};
  double h{1e-3};

  double delta3() const { return delta1 * omega; }
  void validate() const;
};

struct BenchRow {
  double t, x, xd, s, v, u_s, d;
};

struct BenchMetrics {
  /// max |s| over the last second.
  double steady_s_max{0};
  /// std of u_s − d over the last second (deviation from equivalent control).
  double chattering_index{0};
  double std_u_s{0};
};

BenchScenario bench_preset();
std::vector<BenchRow> run_bench(const BenchScenario &b);
BenchMetrics bench_metrics(const std::vector<BenchRow> &rows,
                           const BenchScenario &b);

} // namespace nsadm
