/// Random controller states shared by the unit and acceptance suites.
#pragma once

#include <random>

#include "nsadm/admittance.hpp"
#include "oracles.hpp"

namespace cases {

using nsadm::AdmittanceGains;
using nsadm::AdmittanceState;
using nsadm::BoxConstraint;
using nsadm::Measurement;
using nsadm::ModelEstimate;
using oracle::Mat;
using oracle::Vec;

struct Case {
  AdmittanceGains g;
  ModelEstimate model;
  AdmittanceState st;
  Measurement meas;
  oracle::RecursionIn in;
};

inline Case random_case(std::mt19937_64 &rng, int n, double box_scale) {
  std::uniform_real_distribution<double> U(0, 1);
  const auto r = [&](double a, double b) { return a + (b - a) * U(rng); };
  const auto rv = [&](double a, double b) {
    Vec v(n);
    for (int i = 0; i < n; ++i)
      v[i] = r(a, b);
    return v;
  };
  Case c;
  c.g.Mx = r(0.2, 1) * Mat::Identity(n, n);
  c.g.Bx = r(0.5, 5) * Mat::Identity(n, n);
  c.g.Lambda = r(2, 20);
  c.g.k1 = {false, r(5, 60)};
  c.g.msta.k2 = r(5, 25);
  c.g.msta.k3 = r(20, 250);
  c.g.h = 1e-3;
  c.g.box = BoxConstraint(rv(1, 4) * box_scale);
  const Mat Mh = rv(0.1, 0.5).asDiagonal();
  const Mat Ch = rv(0, 20).asDiagonal();
  const Vec Gh = rv(-1, 1);
  const Mat Mr = rv(0.5, 2).asDiagonal();
  c.model = ModelEstimate::Constant(Mh, Ch, Gh);
  c.model.robust_mass_fn = [Mr](const Vec &) { return Mr; };
  const Vec q = rv(-1, 1);
  c.st.qx_prev = q + rv(-1e-3, 1e-3);
  c.st.qxd_prev = rv(-0.2, 0.2);
  c.st.q_prev = q + rv(-1e-3, 1e-3);
  c.st.qe_prev = c.st.qx_prev - c.st.q_prev;
  c.st.msta_state.v = rv(-2, 2);
  c.meas = {q, rv(-3, 3), rv(-3, 3)};

  auto &in = c.in;
  in.Mx = c.g.Mx;
  in.Bx = c.g.Bx;
  in.M = Mh;
  in.C = Ch;
  in.G = Gh;
  in.Mr = Mr;
  in.K1 = c.g.k1.k1 * Mat::Identity(n, n);
  in.F = c.g.box.limits;
  in.h = c.g.h;
  in.Lambda = c.g.Lambda;
  in.qx_prev = c.st.qx_prev;
  in.qxd_prev = c.st.qxd_prev;
  in.q_prev = c.st.q_prev;
  in.q = q;
  in.fc = c.meas.fc;
  in.fd = c.meas.fd;
  const Vec s = oracle::sliding(in);
  in.u_s.resize(n);
  const double beta = n == 1 ? std::max(1.0, 1 + in.h * (c.g.k1.k1 + Ch(0, 0)) / Mr(0, 0)) : 1.0;
  for (int i = 0; i < n; ++i)
    in.u_s[i] = oracle::sta_inclusion(s[i], c.g.msta.k2, c.g.msta.k3, beta, in.h,
                                      c.st.msta_state.v[i]).u_s;
  return c;
}

inline double rel(const Vec &a, const Vec &b) { return (a - b).norm() / std::max(1.0, b.norm()); }

} // namespace cases
