// Command-line front end: run, compare, sweep, verify, plot.
#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "nsadm/errors.hpp"
#include "nsadm/scenario_io.hpp"
#include "nsadm/sim.hpp"
#include "nsadm/svg_plot.hpp"
#include "nsadm/trace_io.hpp"
#include "nsadm/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nsadm;

namespace {

enum Exit { kOk = 0, kConfig = 2, kSimulation = 3, kVerification = 4 };

/// Either a closed-loop scenario or the robust-term benchmark.
struct Resolved {
  std::optional<Scenario> scenario;
  std::optional<BenchScenario> bench;
};

json scenario_document(const std::string &ref) {
  if (ref == "msta_bench")
    return bench_to_json(bench_preset());
  if (fs::is_regular_file(ref))
    return load_json_file(ref);
  if (ref.find('/') != std::string::npos || ref.ends_with(".json"))
    throw ConfigError("scenario file '" + ref + "' not found");
  return scenario_to_json(preset(ref));
}

Resolved resolve(const std::string &ref, const std::vector<std::string> &sets) {
  if (ref.empty())
    throw ConfigError("--scenario is required (preset name or JSON file)");
  json doc = scenario_document(ref);
  for (const auto &s : sets)
    apply_override(doc, s);
  Resolved r;
  if (is_bench_document(doc))
    r.bench = bench_from_json(doc);
  else
    r.scenario = scenario_from_json(doc);
  return r;
}

fs::path prepare_dir(const std::string &out) {
  const fs::path p(out);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p))
    throw ConfigError("cannot create output directory '" + out + "'");
  return p;
}

void print_metrics(const std::string &label, const json &m) {
  std::cout << label << ": " << m.dump() << '\n';
}

struct Common {
  std::string scenario;
  std::string out{"out"};
  std::vector<std::string> sets;
  bool plot{false};
};

void add_common(CLI::App *app, Common &c, bool with_plot = true) {
  app->add_option("--scenario,-s", c.scenario, "Preset name or scenario JSON file");
  app->add_option("--out,-o", c.out, "Output directory")->capture_default_str();
  app->add_option("--set", c.sets, "Override key=value on a dotted scenario path (repeatable)");
  if (with_plot)
    app->add_flag("--plot", c.plot, "Write position/force/torque SVG panels");
}

int cmd_run(const Common &c) {
  const auto r = resolve(c.scenario, c.sets);
  const fs::path dir = prepare_dir(c.out);
  if (r.bench) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto rows = run_bench(*r.bench);
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_bench_csv((dir / "trace.csv").string(), rows);
    json m = bench_metrics_to_json(bench_metrics(rows, *r.bench));
    m["runtime_s"] = dt;
    save_json_file((dir / "metrics.json").string(), m);
    save_json_file((dir / "scenario.json").string(), bench_to_json(*r.bench));
    print_metrics(r.bench->name, m);
    return kOk;
  }
  const Scenario &sc = *r.scenario;
  const auto t0 = std::chrono::steady_clock::now();
  const Trace tr = run_scenario(sc);
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_trace_csv((dir / "trace.csv").string(), tr);
  json m = metrics_to_json(compute_metrics(tr, sc));
  m["runtime_s"] = dt;
  m["rows"] = tr.rows.size();
  save_json_file((dir / "metrics.json").string(), m);
  save_json_file((dir / "scenario.json").string(), scenario_to_json(sc));
  if (c.plot)
    write_run_plots(dir.string(), {{sc.name, &tr}}, sc);
  print_metrics(sc.name, m);
  return kOk;
}

int cmd_compare(const Common &c, const std::vector<std::string> &kinds) {
  const auto r = resolve(c.scenario, c.sets);
  if (!r.scenario)
    throw ConfigError("compare needs a closed-loop scenario, not the benchmark");
  const fs::path dir = prepare_dir(c.out);
  std::vector<std::pair<std::string, Trace>> traces;
  json rows = json::array();
  for (const auto &k : kinds) {
    Scenario sc = *r.scenario;
    sc.controller.kind = controller_kind_from_string(k);
    traces.emplace_back(k, run_scenario(sc));
    json m = metrics_to_json(compute_metrics(traces.back().second, sc));
    rows.push_back({{"controller", k}, {"metrics", m}});
    print_metrics(k, m);
  }
  save_json_file((dir / "metrics_compare.json").string(),
                 {{"scenario", r.scenario->name}, {"rows", rows}});
  if (c.plot) {
    std::vector<std::pair<std::string, const Trace *>> refs;
    for (const auto &[k, t] : traces)
      refs.emplace_back(k, &t);
    write_run_plots(dir.string(), refs, *r.scenario);
  }
  return kOk;
}

int cmd_sweep(const Common &c, const std::string &param, const std::vector<double> &values) {
  const auto r = resolve(c.scenario, c.sets);
  if (!r.scenario)
    throw ConfigError("sweep needs a closed-loop scenario, not the benchmark");
  if (param.empty() || values.empty())
    throw ConfigError("sweep needs --param and --values");
  const fs::path dir = prepare_dir(c.out);
  const auto rows = sweep(*r.scenario, param, values);
  json arr = json::array();
  for (const auto &row : rows) {
    arr.push_back({{"value", row.value}, {"metrics", metrics_to_json(row.metrics)}});
    std::cout << param << "=" << row.value << ": " << metrics_to_json(row.metrics).dump() << '\n';
  }
  save_json_file((dir / "sweep.json").string(),
                 {{"scenario", r.scenario->name}, {"param", param}, {"rows", arr}});
  return kOk;
}

int cmd_verify(const std::vector<std::string> &groups, double tol_scale) {
  VerifyOptions opt;
  opt.groups = groups;
  opt.tol_scale = tol_scale;
  const auto results = run_verification(opt);
  std::vector<std::string> failed;
  std::string current;
  bool group_ok = true;
  const auto close_group = [&] {
    if (current.empty())
      return;
    std::cout << "[" << (group_ok ? "PASS" : "FAIL") << "] group " << current << '\n';
    if (!group_ok)
      failed.push_back(current);
  };
  for (const auto &r : results) {
    if (r.group != current) {
      close_group();
      current = r.group;
      group_ok = true;
    }
    group_ok = group_ok && r.pass;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g < %.3g", r.value, r.tol);
    std::cout << "  " << (r.pass ? "ok  " : "FAIL") << "  " << r.name << "  (" << buf << ")\n";
  }
  close_group();
  if (!failed.empty()) {
    std::cout << "failed groups:";
    for (const auto &g : failed)
      std::cout << ' ' << g;
    std::cout << '\n';
    return kVerification;
  }
  std::cout << "all groups pass\n";
  return kOk;
}

int cmd_plot(const Common &c, const std::string &trace_path) {
  if (trace_path.empty())
    throw ConfigError("plot needs --trace");
  const auto r = resolve(c.scenario, c.sets);
  if (!r.scenario)
    throw ConfigError("plot needs a closed-loop scenario, not the benchmark");
  const Trace tr = read_trace_csv(trace_path);
  if (tr.dof != r.scenario->plant.dof())
    throw ConfigError("trace DoF does not match the scenario");
  const fs::path dir = prepare_dir(c.out);
  for (const auto &p : write_run_plots(dir.string(), {{r.scenario->name, &tr}}, *r.scenario))
    std::cout << p << '\n';
  return kOk;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Set-valued admittance control simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "nsadm 1.0");

  Common run_c, cmp_c, sw_c, plot_c;
  auto *run = app.add_subcommand("run", "Simulate one scenario; write trace.csv and metrics.json");
  add_common(run, run_c);

  auto *cmp = app.add_subcommand("compare", "Run several controllers on one scenario");
  add_common(cmp, cmp_c);
  std::vector<std::string> kinds{"proposed", "naive"};
  cmp->add_option("--controllers", kinds, "Controller kinds to compare")->capture_default_str();

  auto *sw = app.add_subcommand("sweep", "Metrics over values of one scenario field");
  add_common(sw, sw_c, false);
  std::string param;
  std::vector<double> values;
  sw->add_option("--param", param, "Dotted scenario path, e.g. env.ks_N_per_m");
  sw->add_option("--values", values, "Values to assign")->delimiter(',');

  auto *ver = app.add_subcommand("verify", "Run oracle and invariant checks");
  std::vector<std::string> groups;
  double tol_scale = 1.0;
  ver->add_option("--group,-g", groups, "Restrict to these groups (repeatable)");
  ver->add_option("--tol-scale", tol_scale, "Scale every tolerance (0 forces failures)")
      ->capture_default_str();

  auto *plt = app.add_subcommand("plot", "Render SVG panels from an existing trace.csv");
  add_common(plt, plot_c, false);
  std::string trace_path;
  plt->add_option("--trace", trace_path, "trace.csv written by run");

  app.add_subcommand("presets", "List preset names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*run)
      return cmd_run(run_c);
    if (*cmp)
      return cmd_compare(cmp_c, kinds);
    if (*sw)
      return cmd_sweep(sw_c, param, values);
    if (*ver)
      return cmd_verify(groups, tol_scale);
    if (*plt)
      return cmd_plot(plot_c, trace_path);
    for (const auto &n : preset_names())
      std::cout << n << '\n';
    return kOk;
  } catch (const SimulationError &e) {
    std::cerr << "simulation failure: " << e.what() << '\n';
    return kSimulation;
  } catch (const SolverError &e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSimulation;
  } catch (const ConfigError &e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::invalid_argument &e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSimulation;
  }
}
