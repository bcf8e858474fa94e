#include "nsadm/verify.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "nsadm/admittance.hpp"
#include "nsadm/errors.hpp"
#include "nsadm/msta.hpp"
#include "nsadm/plant.hpp"
#include "nsadm/setvalued.hpp"
#include "nsadm/sim.hpp"
#include "nsadm/trace_io.hpp"

namespace nsadm {
namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Rng = std::mt19937_64;

double uni(Rng &r, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(r);
}

Vec rvec(Rng &r, Eigen::Index n, double a, double b) {
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v[i] = uni(r, a, b);
  return v;
}

/// Bisection on a nondecreasing function; returns the sign-change point.
double bisect(const std::function<double(double)> &f, double lo, double hi) {
  for (int it = 0; it < 200 && hi - lo > 0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi)
      break;
    (f(mid) < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct Ctx {
  double scale;
  unsigned seed;
  std::string group;
  std::vector<CheckResult> *out;
  void add(const std::string &name, double value, double tol) const {
    const double t = tol * scale;
    out->push_back({group, name, value, t, std::isfinite(value) && value < t});
  }
};

// -- prox ---------------------------------------------------------------

/// Minimizer along the ray through z: the 1-D optimality condition
/// (t − r)/μ + a + b t = 0 solved by bisection on t ∈ [0, r].
Vec prox_oracle(const Vec &z, double mu, double a, double b) {
  const double r = z.norm();
  const auto dphi = [&](double t) { return (t - r) / mu + a + b * t; };
  if (r == 0 || dphi(0) >= 0)
    return Vec::Zero(z.size());
  return bisect(dphi, 0, r) / r * z;
}

double prox_objective(const Vec &x, const Vec &z, double mu, double a, double b) {
  return (x - z).squaredNorm() / (2 * mu) + a * x.norm() + 0.5 * b * x.squaredNorm();
}

void group_prox(const Ctx &c) {
  Rng rng(c.seed);
  double err = 0, opt = 0, firm = 0;
  for (int k = 0; k < 1000; ++k) {
    const Eigen::Index n = 1 + k % 4;
    const Vec z = rvec(rng, n, -3, 3);
    const double mu = uni(rng, 0.05, 2), a = uni(rng, 0, 2), b = uni(rng, 0, 3);
    const NormQuadWeights w{a, b};
    const Vec p = prox_norm_quad(z, mu, w);
    err = std::max(err, (p - prox_oracle(z, mu, a, b)).norm() / (1 + z.norm()));
    const double f0 = prox_objective(p, z, mu, a, b);
    for (int j = 0; j < 4; ++j) {
      const Vec d = rvec(rng, n, -1e-3, 1e-3);
      opt = std::max(opt, f0 - prox_objective(p + d, z, mu, a, b));
    }
    const Vec z2 = rvec(rng, n, -3, 3);
    const Vec p2 = prox_norm_quad(z2, mu, w);
    firm = std::max(firm, (p - p2).squaredNorm() - (p - p2).dot(z - z2));
  }
  c.add("closed form vs 1-D bisection minimizer (1000)", err, 1e-8);
  c.add("no local descent around the prox point", opt, 1e-12);
  c.add("firm non-expansiveness violation", firm, 1e-12);
}

// -- projection -----------------------------------------------------------

void group_projection(const Ctx &c) {
  Rng rng(c.seed + 1);
  double idem = 0, nonexp = 0, vi = 0, clamp = 0;
  for (int k = 0; k < 1000; ++k) {
    const Eigen::Index n = 1 + k % 5;
    const BoxConstraint box(rvec(rng, n, 0.5, 5));
    const Vec y = rvec(rng, n, -10, 10), y2 = rvec(rng, n, -10, 10);
    const Vec p = project_box(y, box), p2 = project_box(y2, box);
    idem = std::max(idem, (project_box(p, box) - p).norm());
    nonexp = std::max(nonexp, (p - p2).norm() - (y - y2).norm());
    for (int j = 0; j < 8; ++j) {
      const Vec q = rvec(rng, n, -1, 1).cwiseProduct(box.limits);
      vi = std::max(vi, (y - p).dot(q - p));
    }
    for (Eigen::Index i = 0; i < n; ++i)
      clamp = std::max(clamp, std::abs(p[i] - std::min(box.limits[i], std::max(-box.limits[i], y[i]))));
  }
  c.add("idempotence", idem, 1e-15);
  c.add("non-expansiveness violation", nonexp, 1e-12);
  c.add("normal-cone inequality <y-P(y), p-P(y)> <= 0", vi, 1e-10);
  c.add("entrywise clamp", clamp, 1e-15);
  Vec y(2);
  y << -5, 2;
  Vec F(2);
  F << 3, 4;
  Vec e(2);
  e << -3, 2;
  c.add("example [-5,2] in [3,4]", (project_box(y, BoxConstraint(F)) - e).norm(), 1e-15);
}

// -- sta ----------------------------------------------------------------------

/// Solves s ∈ βŝ + h(k2|ŝ|^{1/2} + h k3) sgn(ŝ) by bisection on ŝ, then reads
/// the sgn selection off the inclusion.
StaScalarStep sta_oracle(double s, const MstaGains &g, double beta, double h, double v) {
  const double c0 = h * h * g.k3;
  const auto f = [&](double x) {
    return beta * x + h * g.k2 * sign0(x) * std::sqrt(std::abs(x)) + c0 * sign0(x) - s;
  };
  double shat = 0;
  if (std::abs(s) > c0)
    shat = bisect(f, s > 0 ? 0.0 : s / beta, s > 0 ? s / beta : 0.0);
  const double sigma = shat != 0 ? sign0(shat) : s / c0;
  StaScalarStep o;
  o.phi2 = sigma;
  o.phi1 = sign0(shat) * std::sqrt(std::abs(shat)) + (h * g.k3 / g.k2) * sigma;
  o.v = v + h * g.k3 * sigma;
  o.u_s = g.k2 * o.phi1 + o.v;
  return o;
}

void group_sta(const Ctx &c) {
  Rng rng(c.seed + 2);
  double err = 0, sat_err = 0;
  for (int k = 0; k < 1000; ++k) {
    MstaGains g;
    g.k2 = uni(rng, 1, 40);
    g.k3 = uni(rng, 5, 400);
    const double h = std::pow(10.0, uni(rng, -4, -2));
    const double beta = 1 + h * uni(rng, 0, 400);
    const double mag = std::pow(10.0, uni(rng, -8, 0));
    const double s = (k % 2 ? 1 : -1) * mag, v = uni(rng, -5, 5);
    const auto a = sta_scalar_implicit_step(s, g, beta, h, v);
    const auto o = sta_oracle(s, g, beta, h, v);
    const double e = std::max({std::abs(a.u_s - o.u_s) / (1 + std::abs(o.u_s)),
                               std::abs(a.v - o.v) / (1 + std::abs(o.v))});
    err = std::max(err, e);
    sat_err = std::max(sat_err, std::abs(a.phi2 - o.phi2));
  }
  c.add("closed form vs inclusion bisection (1000)", err, 1e-10);
  c.add("sgn selection", sat_err, 1e-10);
}

// -- msta -------------------------------------------------------------------------

double psi2(const Vec &x, double a2) { return x.norm() + 0.5 * a2 * x.squaredNorm(); }

void group_msta(const Ctx &c) {
  Rng rng(c.seed + 3);
  double vs = 0;
  for (int k = 0; k < 1000; ++k) {
    MstaGains g;
    g.k2 = uni(rng, 1, 40);
    g.k3 = uni(rng, 5, 400);
    g.fp_max_iter = 400;
    g.fp_tol = 1e-14;
    const double h = std::pow(10.0, uni(rng, -4, -2));
    const double beta = 1 + h * uni(rng, 0, 100);
    const Vec s = Vec::Constant(1, (k % 2 ? 1 : -1) * std::pow(10.0, uni(rng, -8, 0)));
    const MstaState st{Vec::Constant(1, uni(rng, -5, 5))};
    const auto a = msta_implicit_step(s, Mat::Identity(1, 1), Mat::Constant(1, 1, beta), g, h, st);
    const auto b = sta_scalar_implicit_step(s[0], g, beta, h, st.v[0]);
    vs = std::max(vs, std::abs(a.u_s[0] - b.u_s) / (1 + std::abs(b.u_s)));
  }
  c.add("vector solver at n=1 vs scalar closed form (1000)", vs, 1e-8);

  // Subdifferential membership of m̂₂ for general M⁻¹A.
  double incl = 0;
  for (int k = 0; k < 300; ++k) {
    const Eigen::Index n = 1 + k % 3;
    MstaGains g;
    g.k2 = uni(rng, 1, 30);
    g.k3 = uni(rng, 10, 300);
    g.k4 = k % 2 ? uni(rng, 0, 50) : 0.0;
    g.fp_max_iter = 5000;
    g.fp_tol = 1e-14;
    const double h = 1e-3;
    const Mat R = Mat::Random(n, n);
    const Mat M = R * R.transpose() + Mat::Identity(n, n);
    const Mat C = 0.2 * Mat::Random(n, n);
    const Mat K1 = uni(rng, 1, 60) * Mat::Identity(n, n);
    const Mat A = msta_system_matrix(M, C, K1, h);
    const Vec s = rvec(rng, n, -1, 1) * std::pow(10.0, uni(rng, -7, 0));
    const auto d = solve_shat_vector(s, A, M, g, h);
    const double ns = d.shat.norm();
    const double e = ns > 0 ? (d.m2 - (d.shat / ns + g.alpha2() * d.shat)).norm()
                            : std::max(0.0, d.m2.norm() - 1);
    incl = std::max(incl, e);
  }
  c.add("m2 in subdifferential of Psi2 at shat (300)", incl, 1e-6);

  // Unperturbed recursion: V = k3 Psi2(ŝ) + ‖s2‖²/2 is non-increasing.
  long viol = 0;
  for (int run = 0; run < 100; ++run) {
    const Eigen::Index n = 1 + run % 3;
    MstaGains g;
    g.k2 = uni(rng, 1, 30);
    g.k3 = uni(rng, 10, 300);
    g.k4 = run % 2 ? uni(rng, 0, 20) : 0.0;
    g.fp_max_iter = 2000;
    g.fp_tol = 1e-15;
    const double h = std::pow(10.0, uni(rng, -3.5, -2));
    Vec s1 = rvec(rng, n, -1, 1), s2 = rvec(rng, n, -1, 1);
    Vec shat = s1 - h * s2;
    const Mat I = Mat::Identity(n, n);
    double V = g.k3 * psi2(shat, g.alpha2()) + 0.5 * s2.squaredNorm();
    for (int k = 0; k < 1000; ++k) {
      const auto d = solve_shat_vector(s1, I, I, g, h);
      s2 -= h * g.k3 * d.m2;
      shat = d.shat;
      s1 = shat + h * s2;
      const double Vn = g.k3 * psi2(shat, g.alpha2()) + 0.5 * s2.squaredNorm();
      if (Vn > V + 1e-12)
        ++viol;
      V = Vn;
    }
  }
  c.add("Lyapunov V non-increasing: violations in 100x1000 steps", double(viol), 0.5);

  // Explicit step matches its formula.
  MstaGains g;
  g.k4 = 3;
  const Vec s = rvec(rng, 2, -1, 1);
  const MstaState st{rvec(rng, 2, -1, 1)};
  const auto e = msta_explicit_step(s, st, g, 1e-3);
  const Vec us = st.v + g.k2 * s / std::sqrt(s.norm());
  const Vec vn = st.v + 1e-3 * g.k3 * s / s.norm() + g.k4 * s;
  c.add("explicit step formula", (e.u_s - us).norm() + (e.state.v - vn).norm(), 1e-14);
}

// -- admittance ---------------------------------------------------------------

struct Random2Link {
  AdmittanceGains g;
  ModelEstimate model;
  AdmittanceState st;
  Measurement meas;
  Mat Mh, Ch;
};

Random2Link random_case(Rng &rng, UsMode mode, double Fscale) {
  Random2Link r;
  const Eigen::Index n = 2;
  r.g.Mx = uni(rng, 0.2, 1) * Mat::Identity(n, n);
  r.g.Bx = uni(rng, 0.5, 5) * Mat::Identity(n, n);
  r.g.Lambda = uni(rng, 2, 20);
  r.g.k1 = {false, uni(rng, 5, 60)};
  r.g.msta.k2 = uni(rng, 5, 25);
  r.g.msta.k3 = uni(rng, 20, 250);
  r.g.h = 1e-3;
  r.g.us_mode = mode;
  r.g.box = BoxConstraint(rvec(rng, n, 1, 4) * Fscale);
  r.Mh = rvec(rng, n, 0.1, 0.5).asDiagonal();
  r.Ch = rvec(rng, n, 0, 20).asDiagonal();
  r.model = ModelEstimate::Constant(r.Mh, r.Ch, Vec::Zero(n));
  const Vec q = rvec(rng, n, -1, 1);
  r.st.qx_prev = q + rvec(rng, n, -1e-3, 1e-3);
  r.st.qxd_prev = rvec(rng, n, -0.2, 0.2);
  r.st.q_prev = q + rvec(rng, n, -1e-3, 1e-3);
  r.st.qe_prev = r.st.qx_prev - r.st.q_prev;
  r.st.msta_state.v = rvec(rng, n, -2, 2);
  r.meas.q = q;
  r.meas.fc = rvec(rng, n, -3, 3);
  r.meas.fd = rvec(rng, n, -3, 3);
  return r;
}

void group_admittance(const Ctx &c) {
  Rng rng(c.seed + 4);
  double rel = 0, transp = 0, vires = 0, box = 0;
  for (int k = 0; k < 200; ++k) {
    auto r = random_case(rng, UsMode::ScalarImplicit, k % 2 ? 1.0 : 50.0);
    const auto out = admittance_step(r.st, r.meas, r.model, r.g);
    // Straight-line evaluation with constant diagonal estimates.
    const double h = r.g.h, L = r.g.Lambda;
    const Mat I = Mat::Identity(2, 2);
    const Vec ux = (r.g.Mx + r.g.Bx * h).inverse() * (r.g.Mx * r.st.qxd_prev + h * (r.meas.fc + r.meas.fd));
    const Vec qxs = r.st.qx_prev + h * ux;
    const Vec qe = qxs - r.meas.q;
    const Vec s = (qe - (r.st.qx_prev - r.st.q_prev)) / h + L * qe;
    Vec us(2), vn(2);
    // With scalar k1 on two joints the decoupling gain is 1.
    for (int i = 0; i < 2; ++i) {
      const auto o = sta_oracle(s[i], r.g.msta, 1.0, h, r.st.msta_state.v[i]);
      us[i] = o.u_s;
      vn[i] = o.v;
    }
    const Mat K1 = r.g.k1.k1 * I;
    const Mat B = r.Mh * L + K1, Bh = B + r.Ch, K = (r.Ch + K1) * L;
    const Mat D = r.Mh / (h * h) + Bh / h + K;
    const Vec pa = ((r.Mh + r.Ch * h) * r.meas.q + B * r.st.q_prev * h) / (h * h) + r.Mh * us;
    const Vec pb = r.Mh * (r.st.qx_prev + h * r.st.qxd_prev) / (h * h) + Bh * r.st.qx_prev / h;
    const Vec q1 = r.meas.q + D.inverse() * (pb - pa);
    const Vec ts = D * (qxs - q1);
    const Vec tau = ts.cwiseMax(-r.g.box.limits).cwiseMin(r.g.box.limits);
    const Vec qx = D.inverse() * tau + q1;
    const auto relerr = [](const Vec &a, const Vec &b) { return (a - b).norm() / std::max(1.0, b.norm()); };
    rel = std::max({rel, relerr(out.tau, tau), relerr(out.diag.tau_star, ts),
                    relerr(out.state.qx_prev, qx), relerr(out.state.msta_state.v, vn)});
    if (!out.diag.saturated.any())
      transp = std::max(transp, (out.state.qx_prev - out.diag.qx_star).norm());
    else
      vires = std::max(vires, out.diag.lambda_vi_residual);
    box = std::max(box, (out.tau.cwiseAbs() - r.g.box.limits).maxCoeff());
  }
  c.add("step vs straight-line recursion (200, relative)", rel, 1e-9);
  c.add("unsaturated transparency q_x = q*_x", transp, 1e-12);
  c.add("variational residual at saturated steps", vires, 1e-10);
  c.add("torque inside box", std::max(0.0, box), 1e-15);
}

// -- plant --------------------------------------------------------------------

void group_plant(const Ctx &c) {
  Rng rng(c.seed + 5);
  OneDofParams p1;
  const auto one = make_one_dof(p1);
  const PlantState rest{Vec::Zero(1), Vec::Zero(1)};
  const Vec z1 = Vec::Zero(1);
  const double qdd = forward_dynamics(one, rest, z1, z1, z1)[0];
  // M = m l²/3 + m lc², G = m g lc at q = 0.
  const double M0 = 5 * 0.25 / 3 + 5 * 0.0625, G0 = 5 * 9.81 * 0.25;
  c.add("1-DoF free fall at rest", std::abs(qdd + G0 / M0), 1e-12);
  const Vec G = one.gravity_fn(rest.q);
  c.add("1-DoF gravity hold", std::abs(forward_dynamics(one, rest, G, z1, z1)[0]), 1e-12);
  const Vec w1 = joint_contact_torque(one, rest.q, Eigen::Vector2d(0, 2));
  c.add("1-DoF J^T (0,2) at q=0", std::abs(w1[0] - 1.0), 1e-15);

  TwoLinkParams p2;
  const auto two = make_two_link(p2);
  double hold = 0, skew = 0, spd = 0, sym = 0;
  for (int k = 0; k < 200; ++k) {
    const Vec q = rvec(rng, 2, -M_PI, M_PI), qd = rvec(rng, 2, -3, 3), x = rvec(rng, 2, -1, 1);
    const PlantState s{q, Vec::Zero(2)};
    hold = std::max(hold, forward_dynamics(two, s, two.gravity_fn(q), Vec::Zero(2), Vec::Zero(2)).norm());
    const double e = 1e-6;
    const Mat Md = (two.mass_fn(q + e * qd) - two.mass_fn(q - e * qd)) / (2 * e);
    const Mat N = Md - 2 * two.coriolis_fn(q, qd);
    skew = std::max(skew, std::abs(x.dot(N * x)) / x.squaredNorm());
    const Mat M = two.mass_fn(q);
    sym = std::max(sym, (M - M.transpose()).norm());
    spd = std::max(spd, -Eigen::SelfAdjointEigenSolver<Mat>(M).eigenvalues().minCoeff());
    spd = std::max(spd, 0.0);
  }
  c.add("two-link gravity hold", hold, 1e-12);
  c.add("two-link skew-symmetry x'(Mdot-2C)x", skew, 1e-6);
  c.add("two-link M symmetric", sym, 1e-14);
  c.add("two-link M positive definite (max(0, -lambda_min))", spd, 1e-12);

  // Undamped pendulum energy over 1 s.
  p1.sin_amp = 0;
  p1.c_amp = 0;
  const auto pend = make_one_dof(p1);
  EnvironmentModel env;
  env.ys = -10;
  const auto energy = [&](const PlantState &x) {
    return kinetic_energy(pend, x) + p1.m1 * p1.g * p1.lc1 * std::sin(x.q[0]);
  };
  PlantState x{Vec::Constant(1, 0.3), Vec::Zero(1)};
  const double E0 = energy(x);
  x = integrate_substep(pend, x, Vec::Zero(1), env, {}, 0, 1e-5, 100000);
  const double scale = p1.m1 * p1.g * p1.lc1;
  c.add("pendulum energy drift over 1 s (relative)", std::abs(energy(x) - E0) / scale, 5e-3);
}

// -- sim ----------------------------------------------------------------------

void group_sim(const Ctx &c) {
  const Scenario sc = preset("fig3_one_dof");
  const Trace a = run_scenario(sc);
  const Trace b = run_scenario(sc);
  const Metrics m = compute_metrics(a, sc);
  c.add("fig3 steady force error", m.steady_force_err, 0.05);
  c.add("fig3 torque violations", m.torque_violations, 0.5);
  long lost = 0;
  for (const auto &r : a.rows)
    if (r.t > 1.5 && !r.contact)
      ++lost;
  c.add("fig3 contact lost after 1.5 s (rows)", double(lost), 0.5);
  long diff = 0;
  for (std::size_t k = 0; k < a.rows.size(); ++k)
    if (a.rows[k].q != b.rows[k].q || a.rows[k].tau != b.rows[k].tau ||
        a.rows[k].qx != b.rows[k].qx)
      ++diff;
  c.add("bit-identical rerun (differing rows)", double(diff), 0.5);

  std::stringstream ss;
  write_trace_csv(ss, a);
  const Trace back = read_trace_csv(ss);
  long rt = back.rows.size() == a.rows.size() ? 0 : 1;
  for (std::size_t k = 0; !rt && k < a.rows.size(); ++k) {
    const auto &u = a.rows[k], &v = back.rows[k];
    if (u.t != v.t || u.q != v.q || u.qd != v.qd || u.qx != v.qx || u.tau != v.tau ||
        u.tau_star != v.tau_star || u.fc_cart != v.fc_cart || u.s != v.s || u.v != v.v ||
        u.u_s != v.u_s || u.saturated != v.saturated || u.contact != v.contact)
      ++rt;
  }
  c.add("CSV round trip (differing rows)", double(rt), 0.5);

  Scenario free = sc;
  free.env.ys = -10;
  free.fd_schedule = {{0.0, 0.0, 0.0}};
  free.duration = 1.0;
  double drift = 0;
  for (const auto &r : run_scenario(free).rows)
    drift = std::max(drift, (r.q - free.q0).norm());
  c.add("free space, f_d = 0: position drift", drift, 1e-9);
}

const std::map<std::string, std::function<void(const Ctx &)>> &registry() {
  static const std::map<std::string, std::function<void(const Ctx &)>> r{
      {"prox", group_prox},     {"projection", group_projection},
      {"sta", group_sta},       {"msta", group_msta},
      {"admittance", group_admittance}, {"plant", group_plant},
      {"sim", group_sim}};
  return r;
}

} // namespace

std::vector<std::string> verify_groups() {
  return {"prox", "projection", "sta", "msta", "admittance", "plant", "sim"};
}

std::vector<CheckResult> run_verification(const VerifyOptions &opt) {
  std::vector<std::string> groups = opt.groups.empty() ? verify_groups() : opt.groups;
  for (const auto &g : groups)
    if (!registry().count(g)) {
      std::string list;
      for (const auto &n : verify_groups())
        list += (list.empty() ? "" : ", ") + n;
      throw ConfigError("unknown verify group '" + g + "' (available: " + list + ")");
    }
  std::vector<CheckResult> out;
  for (const auto &g : groups) {
    const Ctx c{opt.tol_scale, opt.seed, g, &out};
    try {
      registry().at(g)(c);
    } catch (const std::exception &e) {
      out.push_back({g, std::string("exception: ") + e.what(), NAN, 0, false});
    }
  }
  return out;
}

} // namespace nsadm
