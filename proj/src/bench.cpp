#include <cmath>

#include "nsadm/errors.hpp"
#include "nsadm/sim.hpp"

namespace nsadm {

void BenchScenario::validate() const {
  msta.validate();
  if (!(h > 0) || !(duration > 0))
    throw ParameterError("bench: h and duration must be > 0");
  if (!(Lambda > 0))
    throw ParameterError("bench: Lambda must be > 0");
}

std::vector<BenchRow> run_bench(const BenchScenario &b) {
  b.validate();
  const double h = b.h;
  const double A = b.delta1, w = b.omega, g1 = b.msta.gamma1, L = b.Lambda;
  // Exact one- and two-fold integrals of d over [t0, t0 + h].
  const auto I1 = [&](double t0) { return A / w * (std::cos(w * t0) - std::cos(w * (t0 + h))); };
  const auto I2 = [&](double t0) {
    return A / w * std::cos(w * t0) * h -
           A / (w * w) * (std::sin(w * (t0 + h)) - std::sin(w * t0));
  };
  const long N = std::lround(b.duration / h);
  std::vector<BenchRow> rows;
  rows.reserve(static_cast<std::size_t>(N));
  double x = b.x0, xd = 0.0;
  MstaState st = MstaState::Zero(1);
  const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(1, 1);
  const Eigen::MatrixXd Amat = Eigen::MatrixXd::Constant(1, 1, 1.0 + h * g1);
  for (long k = 0; k < N; ++k) {
    const double t = static_cast<double>(k) * h;
    const Eigen::VectorXd s = Eigen::VectorXd::Constant(1, xd + L * x);
    double us = 0;
    switch (b.us_mode) {
    case UsMode::Explicit: {
      auto r = msta_explicit_step(s, st, b.msta, h);
      us = r.u_s[0];
      st = r.state;
      break;
    }
    case UsMode::ImplicitVector: {
      auto r = msta_implicit_step(s, M, Amat, b.msta, h, st);
      us = r.u_s[0];
      st = r.state;
      break;
    }
    case UsMode::ImplicitDecoupled: {
      auto r = msta_implicit_decoupled_step(s, b.msta, h, st);
      us = r.u_s[0];
      st = r.state;
      break;
    }
    case UsMode::ScalarImplicit: {
      auto r = sta_scalar_implicit_step(s[0], b.msta, 1.0 + h * g1, h, st.v[0]);
      us = r.u_s;
      st.v[0] = r.v;
      break;
    }
    }
    rows.push_back({t, x, xd, s[0], st.v[0], us, A * std::sin(w * t)});
    const double u = -L * xd - g1 * s[0] - us;
    x += xd * h + 0.5 * u * h * h + I2(t);
    xd += u * h + I1(t);
    if (!std::isfinite(x) || !std::isfinite(xd))
      throw SimulationError("bench blow-up", k);
  }
  return rows;
}

BenchMetrics bench_metrics(const std::vector<BenchRow> &rows, const BenchScenario &b) {
  BenchMetrics m;
  if (rows.empty())
    return m;
  const double t_tail = rows.back().t + b.h - 1.0;
  double se = 0, se2 = 0, su = 0, su2 = 0;
  long n = 0;
  for (const auto &r : rows) {
    if (r.t < t_tail - 1e-9)
      continue;
    m.steady_s_max = std::max(m.steady_s_max, std::abs(r.s));
    const double e = r.u_s - r.d;
    se += e;
    se2 += e * e;
    su += r.u_s;
    su2 += r.u_s * r.u_s;
    ++n;
  }
  const auto sd = [n](double s1, double s2) {
    const double mu = s1 / n;
    return std::sqrt(std::max(0.0, s2 / n - mu * mu));
  };
  m.chattering_index = sd(se, se2);
  m.std_u_s = sd(su, su2);
  return m;
}

} // namespace nsadm
