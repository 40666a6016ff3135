#ifndef NEARMISS_SCENARIO_HPP
#define NEARMISS_SCENARIO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nearmiss/geometry.hpp"
#include "nearmiss/types.hpp"

namespace nearmiss {

struct Waypoint {
    std::string id;
    Vec2 position;
};

// One drivable polyline. NPC plans and routes reference waypoints by id.
struct Lane {
    std::string id;
    std::vector<Waypoint> waypoints;
};

struct StaticObstacle {
    std::string id;
    std::string tag; // "pole", "pavement", ...
    OrientedBox box;
};

// Region where nothing may spawn (the stand-in for invisible map entities
// that would otherwise produce phantom collisions).
struct ExclusionZone {
    std::string id;
    OrientedBox box;
};

struct WaypointMap {
    std::vector<Lane> lanes;
    double lane_width = 3.5;
    std::vector<StaticObstacle> static_obstacles;
    std::vector<ExclusionZone> exclusion_zones;

    const Waypoint* find_waypoint(const std::string& id) const;
    const Waypoint& require_waypoint(const std::string& id) const;

    // Throws InvalidScenario on duplicate ids or waypoints closer than 0.5 m
    // within one lane.
    void validate() const;
};

// Scripted traffic participant. The actor is in the world from spawn_time to
// despawn_time and starts executing its plan at trigger_time; before that it
// holds its spawn state.
struct NpcScript {
    std::string actor_id;
    ActorModel actor;
    KinematicState spawn;
    struct PlanStep {
        std::string waypoint_id;
        double target_speed = 0.0;
    };
    std::vector<PlanStep> plan;
    double spawn_time = 0.0;
    double trigger_time = 0.0;
    std::optional<double> despawn_time;
    std::optional<double> steering_override; // [-1, 1]
    // Override semantics: replace the plan steering (default) or add to it.
    bool steering_offset_mode = false;
};

struct Route {
    std::string start_wp_id;
    std::string end_wp_id;
    std::vector<std::string> via;
    double target_speed = 8.0; // m/s cruise target for the ego driver
};

// Ego controller tuning. Part of the scenario so that derived scenarios
// (clips, mutants) drive identically to their parent.
struct DriverParams {
    double ttc_brake_threshold = 1.5; // s; 0 disables predictive braking
    double ttc_horizon = 4.0;         // s of constant-velocity projection
    double lookahead_min = 4.0;       // m
    double lookahead_gain = 0.6;      // s of travel added to the lookahead
    double standoff_distance = 2.5;   // m; hold short of obstacles dead ahead
    double speed_gain = 0.5;          // accel command per m/s of speed error
};

// Clip window in parent-trace tick coordinates.
struct ClipWindow {
    long rp_frame = 0;
    double o_b = 0.0; // s before the risky point
    double o_a = 0.0; // s after it
    long start_frame = 0;
    long end_frame = 0;
};

// Per-NPC metadata captured at clip time so that mutation target selection
// works from the clip file alone.
struct RelevantNpc {
    std::string actor_id;
    long closest_frame = 0;           // parent-trace tick of closest approach
    double min_window_distance = 0.0; // m, min distance inside the window
    double start_distance = 0.0;      // m, distance at start_frame
};

struct ClipInfo {
    std::string parent_id;
    ClipWindow window;
    std::vector<RelevantNpc> relevant_npcs;
};

struct MutationInfo {
    std::string parent_id;
    std::string op; // "model_swap" | "steering_perturb"
    std::string actor_id;
    std::string new_model_id;    // model_swap only
    double steering_value = 0.0; // steering_perturb only
    std::uint64_t seed = 0;
    int child_index = 0;
};

struct Scenario {
    std::string scenario_id;
    WaypointMap map;
    Route route;
    ActorModel ego_model;
    KinematicState ego_spawn;
    DriverParams driver;
    std::vector<NpcScript> npcs;
    double duration_limit = 60.0; // s
    double tick_rate = 20.0;      // Hz
    std::uint64_t seed = 0;

    // Provenance annotations carried by derived scenarios.
    std::optional<ClipInfo> clip;
    std::optional<MutationInfo> mutation;

    double dt() const { return 1.0 / tick_rate; }

    const NpcScript* find_npc(const std::string& actor_id) const;

    // Structural checks: route ids resolve, route reachable from spawn,
    // plan speeds within model limits. Throws InvalidScenario.
    void validate() const;

    // Route polyline resolved to positions (start, via..., end).
    std::vector<Vec2> route_polyline() const;
};

enum class FailureType { F1, F2, F3, F4, F5 };

const char* to_string(FailureType f);

enum class OutcomeKind { Completed, Collision, Stuck };

const char* to_string(OutcomeKind k);

struct Outcome {
    OutcomeKind kind = OutcomeKind::Completed;
    long frame = 0; // tick index at which the run ended
    std::optional<FailureType> failure_type;
    std::optional<std::string> other_id; // actor or obstacle hit
};

} // namespace nearmiss

#endif
