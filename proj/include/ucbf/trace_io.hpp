#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ucbf/sim.hpp"

namespace ucbf {

/// Header row for a trace of this scenario. Fixed columns first, telemetry after.
std::vector<std::string> trace_columns(const Scenario& sc);

void write_trace_csv(std::ostream& os, const Scenario& sc, const Trace& trace);
void write_trace_csv(const std::string& path, const Scenario& sc, const Trace& trace);

/// Parses a trace written by write_trace_csv. Abort state is not part of the CSV;
/// pass it back in when re-running monitors offline.
Trace read_trace_csv(std::istream& is);
Trace read_trace_csv_file(const std::string& path);

}  // namespace ucbf
