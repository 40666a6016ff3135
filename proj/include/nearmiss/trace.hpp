#ifndef NEARMISS_TRACE_HPP
#define NEARMISS_TRACE_HPP

#include <map>
#include <string>
#include <vector>

#include "nearmiss/scenario.hpp"
#include "nearmiss/types.hpp"

namespace nearmiss {

struct TraceFrame {
    double t = 0.0;
    long tick = 0;
    KinematicState ego;
    // Keyed by actor id; an actor is absent before spawn and after despawn.
    std::map<std::string, KinematicState> npc_states;
};

// Footprint metadata needed to evaluate distances on a stored trace.
struct TraceActorInfo {
    std::string model_id;
    ActorClass actor_class = ActorClass::Car;
    double length = 0.0;
    double width = 0.0;
};

struct Trace {
    std::string scenario_id;
    double tick_rate = 20.0;
    TraceActorInfo ego_info;
    std::map<std::string, TraceActorInfo> npc_info;
    std::vector<TraceFrame> frames;
    Outcome outcome;
    double wall_time = 0.0; // s; diagnostic only, never serialized

    double dt() const { return 1.0 / tick_rate; }
    double duration() const { return frames.empty() ? 0.0 : frames.back().t; }
    bool failure_free() const { return outcome.kind != OutcomeKind::Collision; }
};

struct ClosestApproach {
    std::string actor_id;
    long frame = 0;    // tick index, earliest on ties
    double distance = 0.0; // m, footprint edge-to-edge
};

// Footprint edge-to-edge distance between ego and one actor in a frame.
// Throws UnknownActor when the actor is not present in the frame.
double frame_distance(const Trace& trace, const TraceFrame& frame, const std::string& actor_id);

// Frame of minimum distance over the whole trace; earliest frame on ties.
// Throws UnknownActor when the actor never appears.
ClosestApproach closest_approach(const Trace& trace, const std::string& actor_id);

// Ego positions in tick order.
std::vector<Vec2> ego_polyline(const Trace& trace);

// Positions of one actor over the frames where it is present, in tick
// order, together with the ticks themselves.
struct ActorPath {
    std::vector<long> ticks;
    std::vector<Vec2> positions;
};
ActorPath actor_path(const Trace& trace, const std::string& actor_id);

} // namespace nearmiss

#endif
