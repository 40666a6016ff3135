#include "nearmiss/trace_io.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "nearmiss/errors.hpp"

namespace nearmiss {

namespace {

using nlohmann::json;

// %.17g round-trips every double exactly through strtod.
void append_double(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

void append_row(std::string& out, double t, const std::string& actor_id,
                const KinematicState& s) {
    append_double(out, t);
    out += ',';
    out += actor_id;
    out += ',';
    append_double(out, s.pose.position.x);
    out += ',';
    append_double(out, s.pose.position.y);
    out += ',';
    append_double(out, s.pose.heading);
    out += ',';
    append_double(out, s.speed);
    out += ',';
    append_double(out, s.yaw_rate);
    out += '\n';
}

json info_to_json(const TraceActorInfo& info) {
    return json{{"model_id", info.model_id},
                {"class", to_string(info.actor_class)},
                {"length", info.length},
                {"width", info.width}};
}

TraceActorInfo info_from_json(const json& j) {
    return {j.at("model_id").get<std::string>(),
            actor_class_from_string(j.at("class").get<std::string>()),
            j.at("length").get<double>(), j.at("width").get<double>()};
}

} // namespace

std::string trace_to_csv(const Trace& trace) {
    std::string out = "t,actor_id,x,y,heading,speed,yaw_rate\n";
    for (const auto& frame : trace.frames) {
        append_row(out, frame.t, "ego", frame.ego);
        for (const auto& [id, state] : frame.npc_states) {
            append_row(out, frame.t, id, state);
        }
    }
    return out;
}

std::string trace_sidecar_to_json(const Trace& trace) {
    json j;
    j["schema_version"] = 1;
    j["scenario_id"] = trace.scenario_id;
    j["tick_rate"] = trace.tick_rate;
    j["outcome"] = json{{"kind", to_string(trace.outcome.kind)},
                        {"frame", trace.outcome.frame}};
    if (trace.outcome.failure_type) {
        j["outcome"]["failure_type"] = to_string(*trace.outcome.failure_type);
    }
    if (trace.outcome.other_id) {
        j["outcome"]["other_id"] = *trace.outcome.other_id;
    }
    j["ego"] = info_to_json(trace.ego_info);
    json npcs = json::object();
    for (const auto& [id, info] : trace.npc_info) {
        npcs[id] = info_to_json(info);
    }
    j["npcs"] = npcs;
    return j.dump(2) + "\n";
}

void export_trace(const Trace& trace, const std::string& csv_path,
                  const std::string& sidecar_path) {
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) {
        throw ParseError("cannot open for writing: " + csv_path);
    }
    csv << trace_to_csv(trace);
    std::ofstream side(sidecar_path, std::ios::binary);
    if (!side) {
        throw ParseError("cannot open for writing: " + sidecar_path);
    }
    side << trace_sidecar_to_json(trace);
}

Trace import_trace(const std::string& csv_path, const std::string& sidecar_path) {
    std::ifstream side_in(sidecar_path, std::ios::binary);
    if (!side_in) {
        throw ParseError("cannot open trace sidecar: " + sidecar_path);
    }
    json j;
    try {
        j = json::parse(side_in);
    } catch (const json::exception& e) {
        throw ParseError(std::string("trace sidecar: ") + e.what());
    }

    Trace trace;
    try {
        trace.scenario_id = j.at("scenario_id").get<std::string>();
        trace.tick_rate = j.at("tick_rate").get<double>();
        const json& outcome = j.at("outcome");
        const std::string kind = outcome.at("kind").get<std::string>();
        if (kind == "completed") {
            trace.outcome.kind = OutcomeKind::Completed;
        } else if (kind == "collision") {
            trace.outcome.kind = OutcomeKind::Collision;
        } else if (kind == "stuck") {
            trace.outcome.kind = OutcomeKind::Stuck;
        } else {
            throw ParseError("unknown outcome kind: " + kind);
        }
        trace.outcome.frame = outcome.at("frame").get<long>();
        if (outcome.contains("failure_type")) {
            const std::string ft = outcome.at("failure_type").get<std::string>();
            if (ft == "F1") trace.outcome.failure_type = FailureType::F1;
            else if (ft == "F2") trace.outcome.failure_type = FailureType::F2;
            else if (ft == "F3") trace.outcome.failure_type = FailureType::F3;
            else if (ft == "F4") trace.outcome.failure_type = FailureType::F4;
            else if (ft == "F5") trace.outcome.failure_type = FailureType::F5;
            else throw ParseError("unknown failure type: " + ft);
        }
        if (outcome.contains("other_id")) {
            trace.outcome.other_id = outcome.at("other_id").get<std::string>();
        }
        trace.ego_info = info_from_json(j.at("ego"));
        for (const auto& [id, info] : j.at("npcs").items()) {
            trace.npc_info[id] = info_from_json(info);
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("trace sidecar: ") + e.what());
    }

    std::ifstream csv(csv_path, std::ios::binary);
    if (!csv) {
        throw ParseError("cannot open trace csv: " + csv_path);
    }
    std::string line;
    if (!std::getline(csv, line) || line != "t,actor_id,x,y,heading,speed,yaw_rate") {
        throw ParseError("bad trace csv header");
    }

    long line_no = 1;
    while (std::getline(csv, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::array<std::string, 7> fields;
        std::size_t start = 0;
        for (int i = 0; i < 7; ++i) {
            const std::size_t comma = line.find(',', start);
            if (i < 6) {
                if (comma == std::string::npos) {
                    throw ParseError("trace csv: short row at line " + std::to_string(line_no));
                }
                fields[i] = line.substr(start, comma - start);
                start = comma + 1;
            } else {
                if (comma != std::string::npos) {
                    throw ParseError("trace csv: long row at line " + std::to_string(line_no));
                }
                fields[i] = line.substr(start);
            }
        }
        const double t = std::strtod(fields[0].c_str(), nullptr);
        const long tick = std::lround(t * trace.tick_rate);
        KinematicState state;
        state.pose.position.x = std::strtod(fields[2].c_str(), nullptr);
        state.pose.position.y = std::strtod(fields[3].c_str(), nullptr);
        state.pose.heading = std::strtod(fields[4].c_str(), nullptr);
        state.speed = std::strtod(fields[5].c_str(), nullptr);
        state.yaw_rate = std::strtod(fields[6].c_str(), nullptr);

        if (trace.frames.empty() || trace.frames.back().tick != tick) {
            const long expected = trace.frames.empty() ? 0 : trace.frames.back().tick + 1;
            if (tick != expected) {
                throw ParseError("trace csv: tick gap at line " + std::to_string(line_no) +
                                 " (expected " + std::to_string(expected) + ", got " +
                                 std::to_string(tick) + ")");
            }
            if (fields[1] != "ego") { // the ego row leads every frame
                throw ParseError("trace csv: frame without ego at line " +
                                 std::to_string(line_no));
            }
            TraceFrame frame;
            frame.tick = tick;
            frame.t = t;
            trace.frames.push_back(std::move(frame));
        }
        TraceFrame& frame = trace.frames.back();
        if (fields[1] == "ego") {
            frame.ego = state;
        } else {
            if (trace.npc_info.find(fields[1]) == trace.npc_info.end()) {
                throw ParseError("trace csv: actor missing from sidecar: " + fields[1]);
            }
            frame.npc_states[fields[1]] = state;
        }
    }
    if (trace.frames.empty()) {
        throw ParseError("trace csv has no frames");
    }
    return trace;
}

std::string sidecar_path_for(const std::string& csv_path) {
    const std::size_t dot = csv_path.rfind(".csv");
    if (dot != std::string::npos && dot == csv_path.size() - 4) {
        return csv_path.substr(0, dot) + ".outcome.json";
    }
    return csv_path + ".outcome.json";
}

} // namespace nearmiss
