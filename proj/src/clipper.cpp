#include "nearmiss/clipper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nearmiss/errors.hpp"

namespace nearmiss {

namespace {

constexpr double kEndSnapRadius = 30.0;   // m
constexpr double kViaArcMargin = 0.5;     // m, keeps via strictly inside the clip
constexpr double kDurationFactor = 3.0;   // clip duration = (o_b + o_a) * factor
const char* kClipLaneId = "__clip";
const char* kClipStartId = "__clip_start";

// Route waypoint with its arc position along the parent route.
struct RouteStop {
    std::string id;
    Vec2 position;
    double arc;
};

std::vector<RouteStop> route_stops(const Scenario& parent) {
    std::vector<RouteStop> stops;
    const Polyline line(parent.route_polyline());
    std::vector<std::string> ids;
    ids.push_back(parent.route.start_wp_id);
    for (const auto& id : parent.route.via) {
        ids.push_back(id);
    }
    ids.push_back(parent.route.end_wp_id);
    double arc = 0.0;
    Vec2 prev;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const Vec2 p = parent.map.require_waypoint(ids[i]).position;
        if (i > 0) {
            arc += distance(prev, p);
        }
        stops.push_back({ids[i], p, arc});
        prev = p;
    }
    return stops;
}

} // namespace

ClippedScenario clip_at_frame(const Scenario& parent, const Trace& trace, long rp_frame,
                              double o_b, double o_a,
                              const ProximityThresholds& thresholds) {
    if (trace.frames.empty()) {
        throw WindowDegenerate("trace has no frames");
    }
    const double rate = trace.tick_rate;
    const long last = trace.frames.back().tick;
    ClipWindow window;
    window.rp_frame = rp_frame;
    window.o_b = o_b;
    window.o_a = o_a;
    window.start_frame = std::max<long>(0, rp_frame - std::lround(o_b * rate));
    window.end_frame = std::min(last, rp_frame + std::lround(o_a * rate));
    if (window.end_frame - window.start_frame < std::lround(rate)) {
        throw WindowDegenerate("clamped clip window shorter than 1 s");
    }

    const TraceFrame& start = trace.frames[window.start_frame];
    const TraceFrame& end = trace.frames[window.end_frame];
    const double t_start = start.t;

    Scenario out = parent;
    out.scenario_id = parent.scenario_id + "#clip@" + std::to_string(rp_frame);
    out.ego_spawn = start.ego;
    out.duration_limit = (o_b + o_a) * kDurationFactor;
    out.npcs.clear();
    out.clip.reset();
    out.mutation.reset();

    // Synthetic start waypoint at the exact recorded ego location. A clip of
    // a clip replaces the previous marker.
    std::erase_if(out.map.lanes, [](const Lane& l) { return l.id == kClipLaneId; });
    out.map.lanes.push_back({kClipLaneId, {{kClipStartId, start.ego.pose.position}}});

    // End waypoint: nearest parent-route waypoint to the recorded ego
    // location at the window end, searching forward along the route first.
    const auto stops = route_stops(parent);
    const Polyline parent_line(parent.route_polyline());
    const double start_arc = parent_line.project(start.ego.pose.position);
    const double end_arc = parent_line.project(end.ego.pose.position);

    const RouteStop* chosen = nullptr;
    double chosen_dist = std::numeric_limits<double>::infinity();
    for (const auto& stop : stops) {
        if (stop.arc < end_arc - 1.0 || stop.id == kClipStartId) {
            continue;
        }
        const double d = distance(stop.position, end.ego.pose.position);
        if (d <= kEndSnapRadius && d < chosen_dist) {
            chosen = &stop;
            chosen_dist = d;
        }
    }
    if (chosen == nullptr) {
        // No forward candidate: accept one between the spawn and the end.
        for (const auto& stop : stops) {
            if (stop.arc < start_arc || stop.id == kClipStartId) {
                continue;
            }
            const double d = distance(stop.position, end.ego.pose.position);
            if (d <= kEndSnapRadius && d < chosen_dist) {
                chosen = &stop;
                chosen_dist = d;
            }
        }
    }
    if (chosen == nullptr) {
        throw NoValidEndWaypoint("no route waypoint within 30 m of the clip end location");
    }

    out.route.start_wp_id = kClipStartId;
    out.route.end_wp_id = chosen->id;
    out.route.via.clear();
    for (const auto& stop : stops) {
        if (stop.arc > start_arc + kViaArcMargin && stop.arc < chosen->arc - kViaArcMargin &&
            stop.id != kClipStartId) {
            out.route.via.push_back(stop.id);
        }
    }

    // NPCs: respawn those present at the window start from their recorded
    // states; keep scripts of NPCs that spawn inside the window; drop the
    // rest. All times shift by the window start.
    for (const auto& script : parent.npcs) {
        const auto present = start.npc_states.find(script.actor_id);
        if (present != start.npc_states.end()) {
            NpcScript npc = script;
            npc.spawn = present->second;
            npc.spawn_time = 0.0;
            npc.trigger_time = std::max(0.0, script.trigger_time - t_start);
            if (script.despawn_time) {
                npc.despawn_time = *script.despawn_time - t_start;
            }
            out.npcs.push_back(std::move(npc));
        } else if (script.spawn_time > t_start && script.spawn_time <= end.t) {
            NpcScript npc = script;
            npc.spawn_time = script.spawn_time - t_start;
            npc.trigger_time = std::max(0.0, script.trigger_time - t_start);
            if (script.despawn_time) {
                npc.despawn_time = *script.despawn_time - t_start;
            }
            out.npcs.push_back(std::move(npc));
        }
    }

    // Relevant NPCs: close NPCs (class radius on the parent trace) whose
    // closest-approach frame falls inside the window and that survived into
    // the clip.
    ClippedScenario result;
    result.parent_id = parent.scenario_id;
    result.window = window;
    const ProximityResult prox =
        identify_proximity(trace, thresholds.th_vehicle, thresholds.th_pedestrian);
    for (const auto& ca : prox.close) {
        if (ca.frame < window.start_frame || ca.frame > window.end_frame) {
            continue;
        }
        if (std::none_of(out.npcs.begin(), out.npcs.end(), [&](const NpcScript& n) {
                return n.actor_id == ca.actor_id;
            })) {
            continue;
        }
        RelevantNpc rel;
        rel.actor_id = ca.actor_id;
        rel.closest_frame = ca.frame;
        rel.min_window_distance = std::numeric_limits<double>::infinity();
        for (long f = window.start_frame; f <= window.end_frame; ++f) {
            if (trace.frames[f].npc_states.count(ca.actor_id)) {
                rel.min_window_distance = std::min(
                    rel.min_window_distance, frame_distance(trace, trace.frames[f], ca.actor_id));
            }
        }
        // -1 marks "absent at the window start" (spawns mid-window).
        rel.start_distance = start.npc_states.count(ca.actor_id)
                                 ? frame_distance(trace, start, ca.actor_id)
                                 : -1.0;
        result.relevant_npcs.push_back(std::move(rel));
    }

    ClipInfo info;
    info.parent_id = result.parent_id;
    info.window = window;
    info.relevant_npcs = result.relevant_npcs;
    out.clip = std::move(info);
    result.scenario = std::move(out);
    return result;
}

ClippedScenario clip(const Scenario& parent, const Trace& trace, const RiskyPoint& rp,
                     double o_b, double o_a, const ProximityThresholds& thresholds) {
    return clip_at_frame(parent, trace, rp.frame, o_b, o_a, thresholds);
}

ClippedScenario clipped_from_scenario(Scenario scenario) {
    if (!scenario.clip) {
        throw ParseError("scenario carries no clip annotation: " + scenario.scenario_id);
    }
    ClippedScenario out;
    out.parent_id = scenario.clip->parent_id;
    out.window = scenario.clip->window;
    out.relevant_npcs = scenario.clip->relevant_npcs;
    out.scenario = std::move(scenario);
    return out;
}

std::vector<SpawnViolation> spawn_validity_check(const Scenario& scenario) {
    std::vector<SpawnViolation> out;

    struct Spawned {
        std::string id;
        OrientedBox box;
    };
    std::vector<Spawned> actors;
    actors.push_back({"ego", footprint(scenario.ego_model, scenario.ego_spawn.pose)});
    for (const auto& npc : scenario.npcs) {
        if (npc.spawn_time <= 0.0) {
            actors.push_back({npc.actor_id, footprint(npc.actor, npc.spawn.pose)});
        }
    }

    for (std::size_t i = 0; i < actors.size(); ++i) {
        for (std::size_t j = i + 1; j < actors.size(); ++j) {
            if (boxes_overlap(actors[i].box, actors[j].box)) {
                out.push_back({"actor_overlap", actors[i].id, actors[j].id});
            }
        }
        for (const auto& so : scenario.map.static_obstacles) {
            if (boxes_overlap(actors[i].box, so.box)) {
                out.push_back({"static_overlap", actors[i].id, so.id});
            }
        }
        for (const auto& zone : scenario.map.exclusion_zones) {
            if (boxes_overlap(actors[i].box, zone.box)) {
                out.push_back({"phantom_zone", actors[i].id, zone.id});
            }
        }
    }
    return out;
}

} // namespace nearmiss
