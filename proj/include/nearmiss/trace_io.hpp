#ifndef NEARMISS_TRACE_IO_HPP
#define NEARMISS_TRACE_IO_HPP

#include <string>

#include "nearmiss/trace.hpp"

namespace nearmiss {

// Trace storage: a CSV with one row per (tick, actor) holding
// t,actor_id,x,y,heading,speed,yaw_rate (doubles at full round-trip
// precision), plus a JSON sidecar with the outcome and the actor catalog.
// The ego uses the reserved actor id "ego".
std::string trace_to_csv(const Trace& trace);
std::string trace_sidecar_to_json(const Trace& trace);

void export_trace(const Trace& trace, const std::string& csv_path,
                  const std::string& sidecar_path);

// Validates strictly increasing ticks with no gaps; throws ParseError.
Trace import_trace(const std::string& csv_path, const std::string& sidecar_path);

// Conventional sidecar path: "<base>.csv" -> "<base>.outcome.json".
std::string sidecar_path_for(const std::string& csv_path);

} // namespace nearmiss

#endif
