#include "nearmiss/trace.hpp"

#include "nearmiss/errors.hpp"
#include "nearmiss/geometry.hpp"

namespace nearmiss {

namespace {

OrientedBox info_footprint(const TraceActorInfo& info, const KinematicState& state) {
    return {state.pose.position, state.pose.heading, info.length, info.width};
}

} // namespace

double frame_distance(const Trace& trace, const TraceFrame& frame, const std::string& actor_id) {
    const auto it = frame.npc_states.find(actor_id);
    if (it == frame.npc_states.end()) {
        throw UnknownActor("actor not present in frame: " + actor_id);
    }
    const auto info_it = trace.npc_info.find(actor_id);
    if (info_it == trace.npc_info.end()) {
        throw UnknownActor("actor not in trace catalog: " + actor_id);
    }
    return box_distance(info_footprint(trace.ego_info, frame.ego),
                        info_footprint(info_it->second, it->second));
}

ClosestApproach closest_approach(const Trace& trace, const std::string& actor_id) {
    ClosestApproach best;
    best.actor_id = actor_id;
    bool found = false;
    for (const auto& frame : trace.frames) {
        if (frame.npc_states.find(actor_id) == frame.npc_states.end()) {
            continue;
        }
        const double d = frame_distance(trace, frame, actor_id);
        if (!found || d < best.distance) {
            best.frame = frame.tick;
            best.distance = d;
            found = true;
        }
    }
    if (!found) {
        throw UnknownActor("actor never appears in trace: " + actor_id);
    }
    return best;
}

std::vector<Vec2> ego_polyline(const Trace& trace) {
    std::vector<Vec2> out;
    out.reserve(trace.frames.size());
    for (const auto& frame : trace.frames) {
        out.push_back(frame.ego.pose.position);
    }
    return out;
}

ActorPath actor_path(const Trace& trace, const std::string& actor_id) {
    ActorPath path;
    for (const auto& frame : trace.frames) {
        const auto it = frame.npc_states.find(actor_id);
        if (it != frame.npc_states.end()) {
            path.ticks.push_back(frame.tick);
            path.positions.push_back(it->second.pose.position);
        }
    }
    return path;
}

} // namespace nearmiss
