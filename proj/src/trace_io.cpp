#include "nsadm/trace_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "nsadm/errors.hpp"

namespace nsadm {
namespace {

const char *const kJointGroups[] = {"q", "qd", "qx", "qxd", "tau", "tau_star", "fc_joint"};
const char *const kSlidingGroups[] = {"s", "v", "u_s", "sat"};

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split(const std::string &line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ','))
    out.push_back(cell);
  if (!line.empty() && line.back() == ',')
    out.emplace_back();
  return out;
}

double parse(const std::string &cell, std::size_t line) {
  const char *b = cell.c_str();
  char *e = nullptr;
  errno = 0;
  const double v = std::strtod(b, &e);
  if (e == b || *e != '\0')
    throw ConfigError("trace csv line " + std::to_string(line) +
                      ": not a number: '" + cell + "'");
  return v;
}

std::ofstream open_out(const std::string &path) {
  std::ofstream os(path);
  if (!os)
    throw ConfigError("cannot write '" + path + "'");
  return os;
}

} // namespace

std::vector<std::string> trace_columns(int dof) {
  std::vector<std::string> c{"t"};
  const auto add = [&](const char *base) {
    for (int i = 0; i < dof; ++i)
      c.push_back(std::string(base) + "_" + std::to_string(i + 1));
  };
  for (const char *g : kJointGroups)
    add(g);
  for (const char *n : {"fc_x", "fc_y", "fd_x", "fd_y"})
    c.emplace_back(n);
  for (const char *g : kSlidingGroups)
    add(g);
  for (const char *n : {"contact", "admittance", "vi_residual"})
    c.emplace_back(n);
  return c;
}

void write_trace_csv(std::ostream &os, const Trace &trace) {
  const auto cols = trace_columns(trace.dof);
  for (std::size_t i = 0; i < cols.size(); ++i)
    os << (i ? "," : "") << cols[i];
  os << '\n';
  std::string line;
  for (const auto &r : trace.rows) {
    line = fmt(r.t);
    const auto vec = [&](const Eigen::VectorXd &v) {
      for (Eigen::Index i = 0; i < v.size(); ++i)
        line += "," + fmt(v[i]);
    };
    for (const auto *v : {&r.q, &r.qd, &r.qx, &r.qxd, &r.tau, &r.tau_star, &r.fc_joint})
      vec(*v);
    for (double x : {r.fc_cart.x(), r.fc_cart.y(), r.fd_cart.x(), r.fd_cart.y()})
      line += "," + fmt(x);
    for (const auto *v : {&r.s, &r.v, &r.u_s})
      vec(*v);
    for (Eigen::Index i = 0; i < r.saturated.size(); ++i)
      line += r.saturated[i] ? ",1" : ",0";
    line += r.contact ? ",1" : ",0";
    line += r.admittance ? ",1" : ",0";
    line += "," + fmt(r.vi_residual);
    os << line << '\n';
  }
}

void write_trace_csv(const std::string &path, const Trace &trace) {
  auto os = open_out(path);
  write_trace_csv(os, trace);
  if (!os)
    throw ConfigError("write failed for '" + path + "'");
}

Trace read_trace_csv(std::istream &is) {
  std::string line;
  if (!std::getline(is, line))
    throw ConfigError("trace csv: empty input");
  const auto header = split(line);
  // 1 + 7n + 4 + 4n + 3 columns.
  const long n11 = static_cast<long>(header.size()) - 8;
  if (n11 < 11 || n11 % 11 != 0)
    throw ConfigError("trace csv: unexpected column count " +
                      std::to_string(header.size()));
  Trace tr;
  tr.dof = static_cast<int>(n11 / 11);
  if (header != trace_columns(tr.dof))
    throw ConfigError("trace csv: header does not match a " +
                      std::to_string(tr.dof) + "-DoF trace");
  const int n = tr.dof;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty())
      continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw ConfigError("trace csv line " + std::to_string(lineno) +
                        ": expected " + std::to_string(header.size()) +
                        " fields, got " + std::to_string(cells.size()));
    std::size_t c = 0;
    const auto next = [&] { return parse(cells[c++], lineno); };
    const auto vec = [&] {
      Eigen::VectorXd v(n);
      for (int i = 0; i < n; ++i)
        v[i] = next();
      return v;
    };
    TraceRow r;
    r.t = next();
    for (auto *v : {&r.q, &r.qd, &r.qx, &r.qxd, &r.tau, &r.tau_star, &r.fc_joint})
      *v = vec();
    r.fc_cart.x() = next();
    r.fc_cart.y() = next();
    r.fd_cart.x() = next();
    r.fd_cart.y() = next();
    for (auto *v : {&r.s, &r.v, &r.u_s})
      *v = vec();
    r.saturated.resize(n);
    for (int i = 0; i < n; ++i)
      r.saturated[i] = next() != 0.0;
    r.contact = next() != 0.0;
    r.admittance = next() != 0.0;
    r.vi_residual = next();
    tr.rows.push_back(std::move(r));
  }
  return tr;
}

Trace read_trace_csv(const std::string &path) {
  std::ifstream is(path);
  if (!is)
    throw ConfigError("cannot read '" + path + "'");
  return read_trace_csv(is);
}

void write_bench_csv(const std::string &path, const std::vector<BenchRow> &rows) {
  auto os = open_out(path);
  os << "t,x,xd,s,v,u_s,d\n";
  for (const auto &r : rows)
    os << fmt(r.t) << ',' << fmt(r.x) << ',' << fmt(r.xd) << ',' << fmt(r.s)
       << ',' << fmt(r.v) << ',' << fmt(r.u_s) << ',' << fmt(r.d) << '\n';
}

} // namespace nsadm
