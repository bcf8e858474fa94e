#include "nsadm/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "nsadm/errors.hpp"

namespace nsadm {

using nlohmann::json;

namespace {

json vec_json(const Eigen::VectorXd &v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    a.push_back(v[i]);
  return a;
}

/// Reads an object field by field and rejects keys nobody asked for.
class ObjReader {
public:
  ObjReader(const json &j, std::string ctx) : j_(j), ctx_(std::move(ctx)) {
    if (!j_.is_object())
      throw ConfigError(ctx_ + ": expected an object");
  }

  template <typename T> void get(const char *key, T &out) {
    seen_.insert(key);
    if (!j_.contains(key))
      return;
    const json &v = j_.at(key);
    if constexpr (std::is_arithmetic_v<T> && !std::is_same_v<T, bool>) {
      if (!v.is_number())
        throw ConfigError(where(key) + ": expected a number");
    }
    try {
      out = v.get<T>();
    } catch (const json::exception &e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  void vec(const char *key, Eigen::VectorXd &out) {
    seen_.insert(key);
    if (!j_.contains(key))
      return;
    const json &v = j_.at(key);
    if (!v.is_array())
      throw ConfigError(where(key) + ": expected an array of numbers");
    out.resize(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number())
        throw ConfigError(where(key) + ": expected an array of numbers");
      out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    }
  }

  const json *sub(const char *key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string where(const std::string &key) const {
    return ctx_.empty() ? key : ctx_ + "." + key;
  }

  void finish() const {
    for (const auto &[k, _] : j_.items())
      if (!seen_.count(k))
        throw ConfigError("unknown field '" + where(k) + "'");
  }

private:
  const json &j_;
  std::string ctx_;
  std::set<std::string> seen_;
};

json plant_to_json(const PlantConfig &p) {
  json j;
  j["kind"] = to_string(p.kind);
  switch (p.kind) {
  case PlantKind::OneDof: {
    const auto &o = p.one_dof;
    j["one_dof"] = {{"m1_kg", o.m1},           {"l1_m", o.l1},
                    {"lc1_m", o.lc1},          {"sin_amp_kg_m2", o.sin_amp},
                    {"c_amp_N_m_s", o.c_amp},  {"g_m_per_s2", o.g},
                    {"F_N_m", o.F}};
    break;
  }
  case PlantKind::TwoLink: {
    const auto &o = p.two_link;
    j["two_link"] = {{"m1_kg", o.m1},         {"m2_kg", o.m2},
                     {"l1_m", o.l1},          {"l2_m", o.l2},
                     {"lc1_m", o.lc1},        {"lc2_m", o.lc2},
                     {"J1_kg_m2", o.J1},      {"J2_kg_m2", o.J2},
                     {"g_m_per_s2", o.g},     {"F1_N_m", o.F1},
                     {"F2_N_m", o.F2}};
    break;
  }
  case PlantKind::LinearMotor: {
    const auto &o = p.linear_motor;
    j["linear_motor"] = {{"M_kg", o.M},
                         {"C_N_s_per_m", o.C},
                         {"kappa", o.kappa},
                         {"coulomb_N", o.coulomb},
                         {"viscous_N_s_per_m", o.viscous},
                         {"g_m_per_s2", o.g},
                         {"F_N", o.F}};
    break;
  }
  }
  return j;
}

PlantConfig plant_from_json(const json &j) {
  ObjReader r(j, "plant");
  PlantConfig p;
  std::string kind = to_string(p.kind);
  r.get("kind", kind);
  p.kind = plant_kind_from_string(kind);
  if (const json *s = r.sub("one_dof")) {
    ObjReader o(*s, "plant.one_dof");
    auto &x = p.one_dof;
    o.get("m1_kg", x.m1);
    o.get("l1_m", x.l1);
    o.get("lc1_m", x.lc1);
    o.get("sin_amp_kg_m2", x.sin_amp);
    o.get("c_amp_N_m_s", x.c_amp);
    o.get("g_m_per_s2", x.g);
    o.get("F_N_m", x.F);
    o.finish();
  }
  if (const json *s = r.sub("two_link")) {
    ObjReader o(*s, "plant.two_link");
    auto &x = p.two_link;
    o.get("m1_kg", x.m1);
    o.get("m2_kg", x.m2);
    o.get("l1_m", x.l1);
    o.get("l2_m", x.l2);
    o.get("lc1_m", x.lc1);
    o.get("lc2_m", x.lc2);
    o.get("J1_kg_m2", x.J1);
    o.get("J2_kg_m2", x.J2);
    o.get("g_m_per_s2", x.g);
    o.get("F1_N_m", x.F1);
    o.get("F2_N_m", x.F2);
    o.finish();
  }
  if (const json *s = r.sub("linear_motor")) {
    ObjReader o(*s, "plant.linear_motor");
    auto &x = p.linear_motor;
    o.get("M_kg", x.M);
    o.get("C_N_s_per_m", x.C);
    o.get("kappa", x.kappa);
    o.get("coulomb_N", x.coulomb);
    o.get("viscous_N_s_per_m", x.viscous);
    o.get("g_m_per_s2", x.g);
    o.get("F_N", x.F);
    o.finish();
  }
  r.finish();
  return p;
}

json msta_to_json(const MstaGains &g) {
  return {{"k2", g.k2},
          {"k3", g.k3},
          {"k4", g.k4},
          {"gamma1_per_s", g.gamma1},
          {"mu", g.mu},
          {"fp_tol", g.fp_tol},
          {"fp_max_iter", g.fp_max_iter}};
}

void msta_from_reader(ObjReader &r, MstaGains &g) {
  r.get("k2", g.k2);
  r.get("k3", g.k3);
  r.get("k4", g.k4);
  r.get("gamma1_per_s", g.gamma1);
  r.get("mu", g.mu);
  r.get("fp_tol", g.fp_tol);
  r.get("fp_max_iter", g.fp_max_iter);
}

} // namespace

json scenario_to_json(const Scenario &sc) {
  json j;
  j["name"] = sc.name;
  j["plant"] = plant_to_json(sc.plant);
  j["q0"] = vec_json(sc.q0);
  j["qd0"] = vec_json(sc.qd0);
  j["env"] = {{"ks_N_per_m", sc.env.ks},
              {"ys_m", sc.env.ys},
              {"mu_fric", sc.env.mu_fric}};
  j["disturbance"] = {{"amplitude_N_m", sc.disturbance.amplitude},
                      {"omega_rad_per_s", sc.disturbance.omega}};
  const auto &c = sc.controller;
  json cj = {{"kind", to_string(c.kind)},
             {"us_mode", to_string(c.us_mode)},
             {"Mx_diag", vec_json(c.Mx)},
             {"Bx_diag", vec_json(c.Bx)},
             {"Lambda_per_s", c.Lambda},
             {"k1", c.k1.k1},
             {"k1_structured", c.k1.structured},
             {"Kp", c.pd.Kp},
             {"Kd", c.pd.Kd}};
  cj.update(msta_to_json(c.msta));
  j["controller"] = cj;
  j["estimate"] = {{"M_hat_diag", vec_json(sc.estimate.M_hat)},
                   {"C_hat_diag", vec_json(sc.estimate.C_hat)},
                   {"gravity", to_string(sc.estimate.gravity)},
                   {"robust_inertia", to_string(sc.estimate.robust)},
                   {"robust_inertia_diag", vec_json(sc.estimate.robust_inertia)}};
  json fd = json::array();
  for (const auto &s : sc.fd_schedule)
    fd.push_back({{"t_s", s.t_s}, {"fx_N", s.fx_N}, {"fy_N", s.fy_N}});
  j["fd_schedule"] = fd;
  j["approach"] = {{"mode", to_string(sc.approach.mode)},
                   {"speed_m_per_s", sc.approach.speed},
                   {"kv", sc.approach.kv},
                   {"ki", sc.approach.ki}};
  j["duration_s"] = sc.duration;
  j["h_s"] = sc.h;
  j["dt_sub_s"] = sc.dt_sub;
  j["seed"] = sc.seed;
  return j;
}

Scenario scenario_from_json(const json &j) {
  ObjReader r(j, "");
  Scenario sc;
  r.get("name", sc.name);
  if (const json *p = r.sub("plant"))
    sc.plant = plant_from_json(*p);
  const Eigen::Index n = sc.plant.dof();
  sc.q0 = Eigen::VectorXd::Zero(n);
  sc.qd0 = Eigen::VectorXd::Zero(n);
  r.vec("q0", sc.q0);
  r.vec("qd0", sc.qd0);
  if (const json *e = r.sub("env")) {
    ObjReader o(*e, "env");
    o.get("ks_N_per_m", sc.env.ks);
    o.get("ys_m", sc.env.ys);
    o.get("mu_fric", sc.env.mu_fric);
    o.finish();
  }
  if (const json *e = r.sub("disturbance")) {
    ObjReader o(*e, "disturbance");
    o.get("amplitude_N_m", sc.disturbance.amplitude);
    o.get("omega_rad_per_s", sc.disturbance.omega);
    o.finish();
  }
  auto &c = sc.controller;
  c.Mx = Eigen::VectorXd::Ones(n);
  c.Bx = Eigen::VectorXd::Ones(n);
  if (const json *e = r.sub("controller")) {
    ObjReader o(*e, "controller");
    std::string kind = to_string(c.kind), mode = to_string(c.us_mode);
    o.get("kind", kind);
    o.get("us_mode", mode);
    c.kind = controller_kind_from_string(kind);
    try {
      c.us_mode = us_mode_from_string(mode);
    } catch (const std::exception &ex) {
      throw ConfigError(std::string("controller.us_mode: ") + ex.what());
    }
    o.vec("Mx_diag", c.Mx);
    o.vec("Bx_diag", c.Bx);
    o.get("Lambda_per_s", c.Lambda);
    o.get("k1", c.k1.k1);
    o.get("k1_structured", c.k1.structured);
    o.get("Kp", c.pd.Kp);
    o.get("Kd", c.pd.Kd);
    msta_from_reader(o, c.msta);
    o.finish();
  }
  sc.estimate.M_hat = Eigen::VectorXd::Ones(n);
  sc.estimate.C_hat = Eigen::VectorXd::Zero(n);
  if (const json *e = r.sub("estimate")) {
    ObjReader o(*e, "estimate");
    o.vec("M_hat_diag", sc.estimate.M_hat);
    o.vec("C_hat_diag", sc.estimate.C_hat);
    std::string grav = to_string(sc.estimate.gravity);
    o.get("gravity", grav);
    sc.estimate.gravity = gravity_estimate_from_string(grav);
    std::string robust = to_string(sc.estimate.robust);
    o.get("robust_inertia", robust);
    sc.estimate.robust = robust_inertia_from_string(robust);
    o.vec("robust_inertia_diag", sc.estimate.robust_inertia);
    o.finish();
  }
  if (const json *e = r.sub("fd_schedule")) {
    if (!e->is_array())
      throw ConfigError("fd_schedule: expected an array");
    for (std::size_t i = 0; i < e->size(); ++i) {
      ObjReader o((*e)[i], "fd_schedule." + std::to_string(i));
      FdSegment s;
      o.get("t_s", s.t_s);
      o.get("fx_N", s.fx_N);
      o.get("fy_N", s.fy_N);
      o.finish();
      sc.fd_schedule.push_back(s);
    }
  } else {
    sc.fd_schedule.push_back({});
  }
  if (const json *e = r.sub("approach")) {
    ObjReader o(*e, "approach");
    std::string mode = to_string(sc.approach.mode);
    o.get("mode", mode);
    sc.approach.mode = approach_mode_from_string(mode);
    o.get("speed_m_per_s", sc.approach.speed);
    o.get("kv", sc.approach.kv);
    o.get("ki", sc.approach.ki);
    o.finish();
  }
  r.get("duration_s", sc.duration);
  r.get("h_s", sc.h);
  r.get("dt_sub_s", sc.dt_sub);
  r.get("seed", sc.seed);
  r.finish();
  sc.validate();
  return sc;
}

json bench_to_json(const BenchScenario &b) {
  json j = {{"kind", "msta_bench"},
            {"name", b.name},
            {"us_mode", to_string(b.us_mode)},
            {"Lambda_per_s", b.Lambda},
            {"delta1", b.delta1},
            {"omega_rad_per_s", b.omega},
            {"x0_m", b.x0},
            {"duration_s", b.duration},
            {"h_s", b.h}};
  j.update(msta_to_json(b.msta));
  return j;
}

BenchScenario bench_from_json(const json &j) {
  ObjReader r(j, "");
  BenchScenario b;
  std::string kind, mode = to_string(b.us_mode);
  r.get("kind", kind);
  if (kind != "msta_bench")
    throw ConfigError("kind: expected 'msta_bench'");
  r.get("name", b.name);
  r.get("us_mode", mode);
  b.us_mode = us_mode_from_string(mode);
  r.get("Lambda_per_s", b.Lambda);
  r.get("delta1", b.delta1);
  r.get("omega_rad_per_s", b.omega);
  r.get("x0_m", b.x0);
  r.get("duration_s", b.duration);
  r.get("h_s", b.h);
  msta_from_reader(r, b.msta);
  r.finish();
  try {
    b.validate();
  } catch (const std::invalid_argument &e) {
    throw ConfigError(e.what());
  }
  return b;
}

bool is_bench_document(const json &j) {
  return j.is_object() && j.contains("kind") && j["kind"] == "msta_bench";
}

void apply_override(json &doc, const std::string &path, const json &value) {
  json *cur = &doc;
  std::stringstream ss(path);
  std::string part;
  std::string walked;
  while (std::getline(ss, part, '.')) {
    walked += walked.empty() ? part : "." + part;
    if (cur->is_object()) {
      if (!cur->contains(part))
        throw ConfigError("override: unknown field '" + walked + "'");
      cur = &(*cur)[part];
    } else if (cur->is_array()) {
      std::size_t idx = 0;
      try {
        std::size_t used = 0;
        idx = std::stoul(part, &used);
        if (used != part.size())
          throw std::invalid_argument(part);
      } catch (const std::exception &) {
        throw ConfigError("override: '" + walked + "' needs an array index");
      }
      if (idx >= cur->size())
        throw ConfigError("override: index out of range at '" + walked + "'");
      cur = &(*cur)[idx];
    } else {
      throw ConfigError("override: '" + walked + "' is not a container");
    }
  }
  const bool ok = (cur->is_number() && value.is_number()) ||
                  (cur->is_boolean() && value.is_boolean()) ||
                  (cur->is_string() && value.is_string()) ||
                  (cur->is_array() && value.is_array()) ||
                  (cur->is_object() && value.is_object());
  if (!ok)
    throw ConfigError("override: type mismatch for '" + path + "' (expected " +
                      std::string(cur->type_name()) + ", got " +
                      value.type_name() + ")");
  *cur = value;
}

void apply_override(json &doc, const std::string &assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' must look like key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded())
    value = raw;
  apply_override(doc, key, value);
}

namespace {
json num_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
} // namespace

json metrics_to_json(const Metrics &m) {
  return {{"steady_force_err", num_or_null(m.steady_force_err)},
          {"steady_force_mean_N", num_or_null(m.steady_force_mean)},
          {"steady_force_std_N", num_or_null(m.steady_force_std)},
          {"settle_time_s", num_or_null(m.settle_time)},
          {"rebound_count", m.rebound_count},
          {"torque_violations", m.torque_violations},
          {"chattering_index", num_or_null(m.chattering_index)},
          {"max_penetration_m", num_or_null(m.max_penetration)},
          {"first_contact_time_s", num_or_null(m.first_contact_time)},
          {"max_vi_residual", num_or_null(m.max_vi_residual)}};
}

json bench_metrics_to_json(const BenchMetrics &m) {
  return {{"steady_s_max", m.steady_s_max},
          {"chattering_index", m.chattering_index},
          {"std_u_s", m.std_u_s}};
}

json load_json_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open '" + path + "'");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded())
    throw ConfigError("'" + path + "' is not valid JSON");
  return j;
}

void save_json_file(const std::string &path, const json &j) {
  std::ofstream out(path);
  if (!out)
    throw ConfigError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out)
    throw ConfigError("write failed for '" + path + "'");
}

} // namespace nsadm
