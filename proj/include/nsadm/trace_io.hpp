/// @file
/// @brief CSV export and import of closed-loop traces. Values are written
///        with 17 significant digits so a round trip is exact.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nsadm/sim.hpp"

namespace nsadm {

/// Header names for a trace of the given DoF, in column order.
std::vector<std::string> trace_columns(int dof);

void write_trace_csv(std::ostream &os, const Trace &trace);
void write_trace_csv(const std::string &path, const Trace &trace);

/// Throws ConfigError on a malformed header or row.
Trace read_trace_csv(std::istream &is);
Trace read_trace_csv(const std::string &path);

void write_bench_csv(const std::string &path, const std::vector<BenchRow> &rows);

} // namespace nsadm
