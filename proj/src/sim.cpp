#include "nsadm/sim.hpp"

#include <algorithm>
#include <cmath>

#include "nsadm/errors.hpp"

namespace nsadm {

const char *to_string(PlantKind k) {
  switch (k) {
  case PlantKind::OneDof:
    return "one_dof";
  case PlantKind::TwoLink:
    return "two_link";
  case PlantKind::LinearMotor:
    return "linear_motor";
  }
  return "?";
}

const char *to_string(ControllerKind k) {
  return k == ControllerKind::Proposed ? "proposed" : "naive";
}

const char *to_string(ApproachMode k) {
  return k == ApproachMode::None ? "none" : "velocity";
}

const char *to_string(GravityEstimate k) {
  return k == GravityEstimate::None ? "none" : "exact";
}

const char *to_string(RobustInertia k) {
  switch (k) {
  case RobustInertia::Estimate:
    return "estimate";
  case RobustInertia::Plant:
    return "plant";
  case RobustInertia::Diagonal:
    return "diag";
  }
  return "?";
}

RobustInertia robust_inertia_from_string(const std::string &s) {
  if (s == "estimate")
    return RobustInertia::Estimate;
  if (s == "plant")
    return RobustInertia::Plant;
  if (s == "diag")
    return RobustInertia::Diagonal;
  throw ConfigError("unknown robust inertia '" + s + "' (estimate, plant, diag)");
}

PlantKind plant_kind_from_string(const std::string &s) {
  if (s == "one_dof")
    return PlantKind::OneDof;
  if (s == "two_link")
    return PlantKind::TwoLink;
  if (s == "linear_motor")
    return PlantKind::LinearMotor;
  throw ConfigError("unknown plant kind '" + s +
                    "' (one_dof, two_link, linear_motor)");
}

ControllerKind controller_kind_from_string(const std::string &s) {
  if (s == "proposed")
    return ControllerKind::Proposed;
  if (s == "naive")
    return ControllerKind::Naive;
  throw ConfigError("unknown controller kind '" + s + "' (proposed, naive)");
}

ApproachMode approach_mode_from_string(const std::string &s) {
  if (s == "none")
    return ApproachMode::None;
  if (s == "velocity")
    return ApproachMode::VelocityServo;
  throw ConfigError("unknown approach mode '" + s + "' (none, velocity)");
}

GravityEstimate gravity_estimate_from_string(const std::string &s) {
  if (s == "none")
    return GravityEstimate::None;
  if (s == "exact")
    return GravityEstimate::Exact;
  throw ConfigError("unknown gravity estimate '" + s + "' (none, exact)");
}

ManipulatorModel PlantConfig::build() const {
  switch (kind) {
  case PlantKind::OneDof:
    return make_one_dof(one_dof);
  case PlantKind::TwoLink:
    return make_two_link(two_link);
  case PlantKind::LinearMotor:
    return make_linear_motor(linear_motor);
  }
  throw ConfigError("unknown plant kind");
}

DisturbanceModel DisturbanceConfig::build(int dof) const {
  DisturbanceModel d;
  if (amplitude == 0.0)
    return d;
  d.fe_fn = [a = amplitude, w = omega, dof](double t, const PlantState &) {
    Eigen::VectorXd fe(dof);
    for (int i = 0; i < dof; ++i)
      fe[i] = a * std::sin(w * t + i);
    return fe;
  };
  return d;
}

ModelEstimate EstimateConfig::build(const ManipulatorModel &plant) const {
  const Eigen::Index n = plant.dof;
  if (M_hat.size() != n || C_hat.size() != n)
    throw ConfigError("estimate: M_hat/C_hat diagonals must have " +
                      std::to_string(n) + " entries");
  if ((M_hat.array() <= 0).any())
    throw ConfigError("estimate: M_hat must be positive");
  ModelEstimate m = ModelEstimate::Constant(
      Eigen::MatrixXd(M_hat.asDiagonal()), Eigen::MatrixXd(C_hat.asDiagonal()),
      Eigen::VectorXd::Zero(n));
  if (gravity == GravityEstimate::Exact)
    m.gravity_fn = plant.gravity_fn;
  switch (robust) {
  case RobustInertia::Estimate:
    break;
  case RobustInertia::Plant:
    m.robust_mass_fn = plant.mass_fn;
    break;
  case RobustInertia::Diagonal: {
    if (robust_inertia.size() != n || (robust_inertia.array() <= 0).any())
      throw ConfigError("estimate: robust_inertia_diag must have " +
                        std::to_string(n) + " positive entries");
    const Eigen::MatrixXd Mr = robust_inertia.asDiagonal();
    m.robust_mass_fn = [Mr](const Eigen::VectorXd &) { return Mr; };
    break;
  }
  }
  return m;
}

void Scenario::validate() const {
  const int n = plant.dof();
  if (!(duration > 0))
    throw ConfigError("duration_s must be > 0");
  if (!(h > 0) || !(dt_sub > 0))
    throw ConfigError("h_s and dt_sub_s must be > 0");
  const double ratio = h / dt_sub;
  if (std::abs(ratio - std::round(ratio)) > 1e-6 * ratio || std::round(ratio) < 1)
    throw ConfigError("h_s must be an integer multiple of dt_sub_s");
  if (q0.size() != n || qd0.size() != n)
    throw ConfigError("q0/qd0 must have " + std::to_string(n) + " entries");
  if (controller.Mx.size() != n || controller.Bx.size() != n)
    throw ConfigError("controller Mx/Bx diagonals must have " +
                      std::to_string(n) + " entries");
  if (fd_schedule.empty() || fd_schedule.front().t_s > 0)
    throw ConfigError("fd_schedule must start at t_s = 0");
  for (std::size_t i = 1; i < fd_schedule.size(); ++i)
    if (!(fd_schedule[i].t_s > fd_schedule[i - 1].t_s))
      throw ConfigError("fd_schedule times must be increasing");
  try {
    env.validate();
  } catch (const ParameterError &e) {
    throw ConfigError(e.what());
  }
}

long Scenario::steps() const { return std::lround(duration / h); }

int Scenario::substeps() const { return static_cast<int>(std::lround(h / dt_sub)); }

Eigen::Vector2d Scenario::fd_at(double t) const {
  const FdSegment *cur = &fd_schedule.front();
  for (const auto &seg : fd_schedule)
    if (seg.t_s <= t + 1e-12)
      cur = &seg;
  return {cur->fx_N, cur->fy_N};
}

AdmittanceGains Scenario::gains(const ManipulatorModel &plant) const {
  AdmittanceGains g;
  g.Mx = controller.Mx.asDiagonal();
  g.Bx = controller.Bx.asDiagonal();
  g.Lambda = controller.Lambda;
  g.k1 = controller.k1;
  g.msta = controller.msta;
  g.box = plant.torque_limits;
  g.h = h;
  g.us_mode = controller.us_mode;
  try {
    g.validate();
  } catch (const std::invalid_argument &e) {
    throw ConfigError(e.what());
  }
  return g;
}

namespace {

TraceRow make_row(double t, const PlantState &x, const ContactWrench &w,
                  const Eigen::Vector2d &fd, const Eigen::VectorXd &fc) {
  TraceRow r;
  r.t = t;
  r.q = x.q;
  r.qd = x.qd;
  r.fc_joint = fc;
  r.fc_cart = w.vec();
  r.fd_cart = fd;
  r.contact = w.fy > 0.0;
  return r;
}

} // namespace

Trace run_scenario(const Scenario &sc) {
  sc.validate();
  const ManipulatorModel plant = sc.plant.build();
  const ModelEstimate model = sc.estimate.build(plant);
  const AdmittanceGains g = sc.gains(plant);
  const DisturbanceModel dist = sc.disturbance.build(plant.dof);
  const long N = sc.steps();
  const int nsub = sc.substeps();
  const double dt = sc.h / nsub;
  const Eigen::Index n = plant.dof;

  Trace trace;
  trace.dof = plant.dof;
  trace.rows.reserve(static_cast<std::size_t>(N));

  PlantState x{sc.q0, sc.qd0};
  AdmittanceState st = AdmittanceState::Initial(sc.q0);
  bool adm = sc.approach.mode == ApproachMode::None;
  Eigen::Vector2d servo_int = Eigen::Vector2d::Zero();
  Eigen::VectorXd q_prev = sc.q0;
  Eigen::VectorXd tau = Eigen::VectorXd::Zero(n);

  for (long k = 0; k < N; ++k) {
    const double t = static_cast<double>(k) * sc.h;
    const ContactWrench w = contact_wrench(plant, x, sc.env);
    const Eigen::VectorXd fc = joint_contact_torque(plant, x.q, w.vec());
    const Eigen::Vector2d fd_cart = sc.fd_at(t);
    const Eigen::VectorXd fd = joint_contact_torque(plant, x.q, fd_cart);
    TraceRow row = make_row(t, x, w, fd_cart, fc);

    if (!adm && (w.fx != 0.0 || w.fy != 0.0)) {
      // Bumpless switch: the proxy starts at the measured position and
      // velocity, and the integrator carries the last servo torque.
      adm = true;
      st = AdmittanceState::Initial(x.q);
      st.q_prev = q_prev;
      st.qxd_prev = (x.q - q_prev) / sc.h;
      const auto ms = sample_model(model, x.q, st, g);
      st.msta_state.v = detail::checked_solve<double>(
          ms.Mr, Eigen::VectorXd(tau - ms.G), "bumpless transfer");
    }

    if (adm) {
      const Measurement meas{x.q, fc, fd};
      AdmittanceStep step;
      try {
        step = sc.controller.kind == ControllerKind::Proposed
                   ? admittance_step(st, meas, model, g)
                   : baseline_naive_step(st, meas, model, sc.controller.pd, g);
      } catch (const std::exception &e) {
        throw SimulationError(std::string("controller failure: ") + e.what(), k);
      }
      tau = step.tau;
      st = std::move(step.state);
      row.qx = st.qx_prev;
      row.qxd = st.qxd_prev;
      row.tau = tau;
      row.tau_star = step.diag.tau_star;
      row.s = step.diag.s;
      row.u_s = step.diag.u_s;
      row.v = st.msta_state.v;
      row.saturated = step.diag.saturated;
      row.vi_residual = step.diag.lambda_vi_residual;
    } else {
      const Eigen::MatrixXd J = plant.jacobian_fn(x.q);
      const Eigen::Vector2d e =
          Eigen::Vector2d(0.0, -sc.approach.speed) - J * x.qd;
      servo_int += sc.h * e;
      const Eigen::VectorXd tau_star =
          J.transpose() * (sc.approach.kv * e + sc.approach.ki * servo_int);
      tau = project_box(tau_star, g.box);
      row.qx = x.q;
      row.qxd = x.qd;
      row.tau = tau;
      row.tau_star = tau_star;
      row.s = Eigen::VectorXd::Zero(n);
      row.u_s = Eigen::VectorXd::Zero(n);
      row.v = Eigen::VectorXd::Zero(n);
      row.saturated = (tau.array() != tau_star.array()).matrix();
    }
    row.admittance = adm;
    trace.rows.push_back(std::move(row));

    q_prev = x.q;
    try {
      x = integrate_substep(plant, std::move(x), tau, sc.env, dist, t, dt, nsub);
    } catch (const SimulationError &e) {
      throw SimulationError("plant blow-up: non-finite state", k);
    } catch (const std::exception &e) {
      throw SimulationError(std::string("plant failure: ") + e.what(), k);
    }
  }
  return trace;
}

double window_force_error(const Trace &trace, const Scenario &sc, double t0,
                          double t1) {
  double sum = 0;
  long cnt = 0;
  for (const auto &r : trace.rows)
    if (r.t >= t0 - 1e-9 && r.t < t1 - 1e-9) {
      sum += r.fc_cart.y();
      ++cnt;
    }
  const double target = std::abs(sc.fd_at(t1 - 0.5 * sc.h).y());
  if (cnt == 0 || target == 0.0)
    return std::numeric_limits<double>::quiet_NaN();
  return std::abs(sum / cnt - target) / target;
}

Metrics compute_metrics(const Trace &trace, const Scenario &sc) {
  Metrics m;
  if (trace.rows.empty())
    return m;
  const auto &rows = trace.rows;
  const double t_end = rows.back().t + sc.h;
  const double t_tail = t_end - 1.0;
  const double target = std::abs(sc.fd_at(rows.back().t).y());
  const Eigen::VectorXd F = sc.plant.build().torque_limits.limits;

  // Tail statistics.
  double sum = 0, sum2 = 0;
  long cnt = 0;
  std::vector<std::vector<double>> us_tail(static_cast<std::size_t>(trace.dof));
  for (const auto &r : rows) {
    if (r.t < t_tail - 1e-9)
      continue;
    sum += r.fc_cart.y();
    sum2 += r.fc_cart.y() * r.fc_cart.y();
    ++cnt;
    for (int i = 0; i < trace.dof; ++i)
      us_tail[static_cast<std::size_t>(i)].push_back(r.u_s[i]);
  }
  const bool any_contact =
      std::any_of(rows.begin(), rows.end(), [](const TraceRow &r) { return r.contact; });
  if (cnt > 0) {
    m.steady_force_mean = sum / cnt;
    m.steady_force_std =
        std::sqrt(std::max(0.0, sum2 / cnt - m.steady_force_mean * m.steady_force_mean));
    if (target > 0 && any_contact)
      m.steady_force_err = std::abs(m.steady_force_mean - target) / target;
  }
  for (const auto &u : us_tail) {
    if (u.empty())
      continue;
    double mu = 0;
    for (double v : u)
      mu += v;
    mu /= static_cast<double>(u.size());
    double var = 0;
    for (double v : u)
      var += (v - mu) * (v - mu);
    m.chattering_index =
        std::max(m.chattering_index, std::sqrt(var / static_cast<double>(u.size())));
  }

  // Contact events, penetration, torque bound.
  double contact_since = -1;
  bool sustained = false;
  const ManipulatorModel plant = sc.plant.build();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto &r = rows[k];
    for (Eigen::Index i = 0; i < r.tau.size(); ++i)
      if (std::abs(r.tau[i]) > F[i])
        ++m.torque_violations;
    m.max_vi_residual = std::max(m.max_vi_residual, r.vi_residual);
    const double pen = sc.env.ys - plant.ee_pose_fn(r.q).y();
    m.max_penetration = std::max(m.max_penetration, pen);
    if (r.contact) {
      if (std::isnan(m.first_contact_time))
        m.first_contact_time = r.t;
      if (contact_since < 0)
        contact_since = r.t;
      if (r.t - contact_since >= 0.2 - 1e-9)
        sustained = true;
    } else {
      if (contact_since >= 0 && sustained)
        ++m.rebound_count;
      contact_since = -1;
    }
  }

  // Settling: first time after impact with the error inside 5% for 0.5 s.
  if (!std::isnan(m.first_contact_time)) {
    const long hold = std::lround(0.5 / sc.h);
    long run = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto &r = rows[k];
      if (r.t < m.first_contact_time)
        continue;
      const double tgt = std::abs(r.fd_cart.y());
      const bool ok = tgt > 0 && std::abs(r.fc_cart.y() - tgt) <= 0.05 * tgt;
      run = ok ? run + 1 : 0;
      if (run >= hold) {
        m.settle_time = rows[k + 1 - static_cast<std::size_t>(run)].t - m.first_contact_time;
        break;
      }
    }
  }
  return m;
}

} // namespace nsadm
