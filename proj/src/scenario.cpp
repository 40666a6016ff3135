#include "nearmiss/scenario.hpp"

#include <cmath>
#include <unordered_set>

#include "nearmiss/errors.hpp"

namespace nearmiss {

namespace {
constexpr double kMinWaypointSpacing = 0.5;  // m
constexpr double kMaxSpawnToRouteGap = 50.0; // m
constexpr double kMaxRouteSegment = 120.0;   // m
} // namespace

const Waypoint* WaypointMap::find_waypoint(const std::string& id) const {
    for (const auto& lane : lanes) {
        for (const auto& wp : lane.waypoints) {
            if (wp.id == id) {
                return &wp;
            }
        }
    }
    return nullptr;
}

const Waypoint& WaypointMap::require_waypoint(const std::string& id) const {
    const Waypoint* wp = find_waypoint(id);
    if (wp == nullptr) {
        throw InvalidScenario("waypoint not in map: " + id);
    }
    return *wp;
}

void WaypointMap::validate() const {
    std::unordered_set<std::string> seen;
    for (const auto& lane : lanes) {
        for (std::size_t i = 0; i < lane.waypoints.size(); ++i) {
            const auto& wp = lane.waypoints[i];
            if (!seen.insert(wp.id).second) {
                throw InvalidScenario("duplicate waypoint id: " + wp.id);
            }
            if (!std::isfinite(wp.position.x) || !std::isfinite(wp.position.y)) {
                throw InvalidScenario("non-finite waypoint position: " + wp.id);
            }
            if (i > 0 &&
                distance(wp.position, lane.waypoints[i - 1].position) < kMinWaypointSpacing) {
                throw InvalidScenario("waypoints closer than 0.5 m in lane " + lane.id);
            }
        }
    }
}

const NpcScript* Scenario::find_npc(const std::string& actor_id) const {
    for (const auto& npc : npcs) {
        if (npc.actor_id == actor_id) {
            return &npc;
        }
    }
    return nullptr;
}

std::vector<Vec2> Scenario::route_polyline() const {
    std::vector<Vec2> pts;
    pts.push_back(map.require_waypoint(route.start_wp_id).position);
    for (const auto& id : route.via) {
        pts.push_back(map.require_waypoint(id).position);
    }
    pts.push_back(map.require_waypoint(route.end_wp_id).position);
    return pts;
}

void Scenario::validate() const {
    map.validate();
    if (duration_limit <= 0.0) {
        throw InvalidScenario("duration_limit must be > 0");
    }
    if (tick_rate <= 0.0) {
        throw InvalidScenario("tick_rate must be > 0");
    }
    const auto finite_state = [](const KinematicState& st) {
        return std::isfinite(st.pose.position.x) && std::isfinite(st.pose.position.y) &&
               std::isfinite(st.pose.heading) && std::isfinite(st.speed) &&
               std::isfinite(st.yaw_rate) && st.speed >= 0.0;
    };
    if (!finite_state(ego_spawn)) {
        throw InvalidScenario("ego spawn state is not finite");
    }
    const auto pts = route_polyline(); // throws on unknown ids
    if (distance(ego_spawn.pose.position, pts.front()) > kMaxSpawnToRouteGap) {
        throw InvalidScenario("route start unreachable from ego spawn");
    }
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (distance(pts[i - 1], pts[i]) > kMaxRouteSegment) {
            throw InvalidScenario("route has a gap larger than 120 m");
        }
    }
    std::unordered_set<std::string> npc_ids;
    for (const auto& npc : npcs) {
        if (npc.actor_id.empty() || npc.actor_id == "ego") {
            throw InvalidScenario("npc id empty or reserved: '" + npc.actor_id + "'");
        }
        if (!npc_ids.insert(npc.actor_id).second) {
            throw InvalidScenario("duplicate npc id: " + npc.actor_id);
        }
        if (npc.trigger_time < 0.0 || npc.spawn_time < 0.0) {
            throw InvalidScenario("negative spawn/trigger time for " + npc.actor_id);
        }
        if (!finite_state(npc.spawn)) {
            throw InvalidScenario("non-finite spawn state for " + npc.actor_id);
        }
        for (const auto& step : npc.plan) {
            map.require_waypoint(step.waypoint_id);
            if (step.target_speed > npc.actor.max_speed + 1e-9) {
                throw InvalidScenario("plan speed above model limit for " + npc.actor_id);
            }
        }
        if (npc.steering_override &&
            (*npc.steering_override < -1.0 || *npc.steering_override > 1.0)) {
            throw InvalidScenario("steering override outside [-1, 1] for " + npc.actor_id);
        }
    }
}

const char* to_string(FailureType f) {
    switch (f) {
    case FailureType::F1: return "F1";
    case FailureType::F2: return "F2";
    case FailureType::F3: return "F3";
    case FailureType::F4: return "F4";
    case FailureType::F5: return "F5";
    }
    return "F1";
}

const char* to_string(OutcomeKind k) {
    switch (k) {
    case OutcomeKind::Completed: return "completed";
    case OutcomeKind::Collision: return "collision";
    case OutcomeKind::Stuck: return "stuck";
    }
    return "completed";
}

} // namespace nearmiss
