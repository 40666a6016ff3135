#include "nearmiss/library.hpp"

#include <cmath>
#include <numbers>

#include "nearmiss/errors.hpp"
#include "nearmiss/rng.hpp"
#include "nearmiss/sim.hpp"

namespace nearmiss {

namespace {

constexpr double kArm = 250.0;          // m, road half-length
constexpr double kWpSpacing = 5.0;      // m
constexpr double kCrosserLead = 90.0;   // m of visible approach before the conflict
constexpr double kCrosserTail = 80.0;   // m of lane beyond the conflict
constexpr double kSuiteDuration = 90.0; // s

// The library driver brakes slightly late, which is what makes planted near
// misses convertible while nominal runs stay clean.
DriverParams library_driver() {
    DriverParams d;
    d.ttc_brake_threshold = 0.9;
    d.ttc_horizon = 3.0;
    d.standoff_distance = 2.0;
    return d;
}

Lane make_lane(const std::string& id, Vec2 from, Vec2 to) {
    Lane lane;
    lane.id = id;
    const double len = distance(from, to);
    const int n = std::max(1, static_cast<int>(std::round(len / kWpSpacing)));
    for (int i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) / n;
        lane.waypoints.push_back({id + "_" + std::to_string(i), from + (to - from) * t});
    }
    return lane;
}

void set_route_over(Scenario& s, const std::vector<const Lane*>& lanes) {
    std::vector<std::string> ids;
    for (const Lane* lane : lanes) {
        for (const auto& wp : lane->waypoints) {
            ids.push_back(wp.id);
        }
    }
    s.route.start_wp_id = ids.front();
    s.route.end_wp_id = ids.back();
    s.route.via.assign(ids.begin() + 1, ids.end() - 1);
}

NpcScript parked_npc(const std::string& id, const std::string& model, Vec2 pos,
                     double heading, double spawn_time = 0.0) {
    NpcScript npc;
    npc.actor_id = id;
    npc.actor = ModelCatalog::builtin().require(model);
    npc.spawn.pose = {pos, wrap_angle(heading)};
    npc.spawn_time = spawn_time;
    return npc;
}

// NPC driving a straight lane at constant speed, spawned mid-lane.
NpcScript moving_npc(Scenario& s, const std::string& id, const std::string& model,
                     const std::string& lane_id, Vec2 from, Vec2 to, Vec2 spawn_pos,
                     double speed, double spawn_time) {
    const Lane lane = make_lane(lane_id, from, to);
    s.map.lanes.push_back(lane);
    NpcScript npc;
    npc.actor_id = id;
    npc.actor = ModelCatalog::builtin().require(model);
    const Vec2 dir = (to - from) * (1.0 / distance(from, to));
    npc.spawn.pose = {spawn_pos, wrap_angle(std::atan2(dir.y, dir.x))};
    npc.spawn.speed = std::min(speed, npc.actor.max_speed);
    npc.spawn_time = spawn_time;
    npc.trigger_time = spawn_time;
    const double spawn_arc = dot(spawn_pos - from, dir);
    for (const auto& wp : lane.waypoints) {
        if (dot(wp.position - from, dir) > spawn_arc + 1.0) {
            npc.plan.push_back({wp.id, std::min(speed, npc.actor.max_speed)});
        }
    }
    return npc;
}

struct CrosserSpec {
    const char* model;
    double speed; // m/s plan speed
    double gap;   // s between the crosser clearing the conflict and the ego
    Vec2 dir;     // unit direction of travel
};

// Ego arrival time at the crosser's line, measured on a calibration run of
// the scenario without the crosser. Returns the crossing point and time.
struct ConflictCrossing {
    Vec2 point;
    double t;
};

ConflictCrossing find_crossing(const Scenario& calibration, Vec2 line_point, Vec2 dir) {
    const Trace trace = run(calibration);
    if (trace.outcome.kind != OutcomeKind::Completed) {
        throw InvalidScenario("library calibration run did not complete: " +
                              calibration.scenario_id);
    }
    const Vec2 a = line_point - dir * (kArm * 2.0);
    const Vec2 b = line_point + dir * (kArm * 2.0);
    for (std::size_t i = 0; i + 1 < trace.frames.size(); ++i) {
        const Vec2 p = trace.frames[i].ego.pose.position;
        const Vec2 q = trace.frames[i + 1].ego.pose.position;
        if (!segments_intersect(p, q, a, b)) {
            continue;
        }
        // Interpolate the crossing instant inside the segment.
        const double denom = cross(q - p, dir);
        double tfrac = 0.5;
        if (std::abs(denom) > 1e-12) {
            tfrac = cross(line_point - p, dir) / denom;
            tfrac = std::clamp(tfrac, 0.0, 1.0);
        }
        ConflictCrossing out;
        out.point = p + (q - p) * tfrac;
        out.t = (static_cast<double>(trace.frames[i].tick) + tfrac) * trace.dt();
        return out;
    }
    throw InvalidScenario("ego route never crosses the conflict line: " +
                          calibration.scenario_id);
}

// Schedule the crosser so it reaches the measured crossing point `gap`
// seconds before the ego. A zero gap is a forced conflict: matched arrival
// with the predictive braking disabled, guaranteed to collide.
void plant_crosser(Scenario& s, const CrosserSpec& spec, Vec2 line_point) {
    if (spec.gap == 0.0) {
        s.driver.ttc_brake_threshold = 0.0;
        s.driver.standoff_distance = 0.0;
    }
    Scenario calibration = s;
    const ConflictCrossing crossing = find_crossing(calibration, line_point, spec.dir);

    const double v = std::min(spec.speed, ModelCatalog::builtin().require(spec.model).max_speed);
    const double t_cross = std::max(0.5, crossing.t - spec.gap);
    const double lead = std::min(kCrosserLead, v * t_cross);
    const double spawn_time = t_cross - lead / v;

    const Vec2 from = crossing.point - spec.dir * (lead + 10.0);
    const Vec2 to = crossing.point + spec.dir * kCrosserTail;
    const Vec2 spawn_pos = crossing.point - spec.dir * lead;
    s.npcs.push_back(moving_npc(s, "crosser", spec.model, "cross", from, to, spawn_pos, v,
                                spawn_time));
}

Scenario base_scenario(const ScenarioTemplate& tmpl, ScenarioFamily family, int variant) {
    Scenario s;
    s.scenario_id = std::string(to_string(family)) + "/v" + std::to_string(variant);
    s.seed = derive_seed(tmpl.seed, static_cast<std::uint64_t>(family),
                         static_cast<std::uint64_t>(variant));
    s.tick_rate = 20.0;
    s.duration_limit = kSuiteDuration;
    s.driver = library_driver();
    s.route.target_speed = tmpl.ego_speed;
    s.ego_model = ModelCatalog::builtin().require("car.sedan");
    return s;
}

// Harmless traffic around the first half of the approach: close enough to
// enter the proximity set, met early enough that perturbation drift cannot
// flag it, and always west of the junction so no decoy path crosses a turn
// exit. Positions get a small deterministic jitter per variant.
void add_decoys(Scenario& s, Rng& rng) {
    const double j1 = rng.uniform(-8.0, 8.0);
    const double j2 = rng.uniform(-8.0, 8.0);
    s.npcs.push_back(parked_npc("parked_van", "car.van", {-160.0 + j1, 5.8}, 0.0, 0.0));
    s.npcs.push_back(parked_npc("parked_car", "car.hatchback", {-90.0 + j2, -5.8},
                                std::numbers::pi, 1.0));

    // Oncoming cyclist on the far shoulder; the ego meets it around t=14 s.
    s.npcs.push_back(moving_npc(s, "shoulder_bike", "bicycle.city", "shoulder",
                                {-58.0 + j1 * 0.2, 6.2}, {-245.0, 6.2},
                                {-58.0 + j1 * 0.2, 6.2}, 5.5, 2.0));

    // Oncoming pedestrian on the sidewalk, met around t=24 s.
    s.npcs.push_back(moving_npc(s, "sidewalk_ped", "pedestrian.walker", "sidewalk",
                                {-28.0 + j2 * 0.2, -8.0}, {-240.0, -8.0},
                                {-28.0 + j2 * 0.2, -8.0}, 1.3, 3.0));
}

void add_street_furniture(Scenario& s, Vec2 junction) {
    s.map.static_obstacles.push_back(
        {"pole_ne", "pole", {{junction.x + 9.0, junction.y + 9.0}, 0.0, 0.4, 0.4}});
    s.map.static_obstacles.push_back(
        {"pole_sw", "pole", {{junction.x - 9.0, junction.y - 9.0}, 0.0, 0.4, 0.4}});
    s.map.static_obstacles.push_back(
        {"pavement_n", "pavement", {{junction.x - 60.0, junction.y + 10.5}, 0.0, 80.0, 1.2}});
    s.map.exclusion_zones.push_back(
        {"sensor_site", {{junction.x + 14.0, junction.y - 12.0}, 0.0, 3.0, 3.0}});
}

Scenario build_crossing_ahead(const ScenarioTemplate& tmpl, int variant) {
    static constexpr CrosserSpec kVariants[5] = {
        {"car.sedan", 12.0, 1.0, {0.0, 1.0}},
        {"car.sedan", 12.0, 1.3, {0.0, 1.0}},
        {"bicycle.city", 5.0, 2.2, {0.0, 1.0}},
        {"pedestrian.runner", 4.5, 1.5, {0.0, 1.0}},
        {"pedestrian.runner", 4.5, 2.8, {0.0, 1.0}},
    };
    Scenario s = base_scenario(tmpl, ScenarioFamily::CrossingAhead, variant);
    Rng rng(s.seed);

    const double x_cross = 20.0 * rng.uniform(-1.0, 1.0);
    const Lane ew = make_lane("ew", {-kArm, 0.0}, {kArm, 0.0});
    s.map.lanes.push_back(ew);
    set_route_over(s, {&s.map.lanes.front()});
    s.ego_spawn = {{{-kArm, 0.0}, 0.0}, tmpl.ego_speed, 0.0};

    add_decoys(s, rng);
    add_street_furniture(s, {x_cross, 0.0});

    CrosserSpec spec = kVariants[variant];
    spec.gap = tmpl.forced_gap >= 0.0 ? tmpl.forced_gap : spec.gap * tmpl.gap_scale;
    plant_crosser(s, spec, {x_cross, 0.0});
    return s;
}

Scenario build_red_light_runner(const ScenarioTemplate& tmpl, int variant) {
    // Runners come fast from the north (southbound).
    static constexpr CrosserSpec kVariants[5] = {
        {"car.hatchback", 12.0, 0.9, {0.0, -1.0}},
        {"car.hatchback", 12.0, 1.2, {0.0, -1.0}},
        {"car.sedan", 13.0, 1.8, {0.0, -1.0}},
        {"bicycle.city", 5.0, 2.3, {0.0, -1.0}},
        {"pedestrian.runner", 4.8, 2.0, {0.0, -1.0}},
    };
    Scenario s = base_scenario(tmpl, ScenarioFamily::RedLightRunner, variant);
    Rng rng(s.seed);

    const double x_cross = 15.0 * rng.uniform(-1.0, 1.0);
    s.map.lanes.push_back(make_lane("ew", {-kArm, 0.0}, {kArm, 0.0}));
    set_route_over(s, {&s.map.lanes.front()});
    s.ego_spawn = {{{-kArm, 0.0}, 0.0}, tmpl.ego_speed, 0.0};

    add_decoys(s, rng);
    add_street_furniture(s, {x_cross, 0.0});

    CrosserSpec spec = kVariants[variant];
    spec.gap = tmpl.forced_gap >= 0.0 ? tmpl.forced_gap : spec.gap * tmpl.gap_scale;
    plant_crosser(s, spec, {x_cross, 0.0});
    return s;
}

Scenario build_post_turn_obstacle(const ScenarioTemplate& tmpl, int variant) {
    // Ego turns right (south) at the junction; the threat sits past the turn.
    static constexpr CrosserSpec kVariants[4] = {
        {"bicycle.city", 5.0, 2.1, {1.0, 0.0}},
        {"bicycle.city", 5.0, 2.4, {1.0, 0.0}},
        {"pedestrian.runner", 4.5, 1.6, {1.0, 0.0}},
        {"car.sport", 14.0, 1.2, {1.0, 0.0}},
    };
    Scenario s = base_scenario(tmpl, ScenarioFamily::PostTurnObstacle, variant);
    Rng rng(s.seed);

    s.map.lanes.push_back(make_lane("ew", {-kArm, 0.0}, {-5.0, 0.0}));
    s.map.lanes.push_back(make_lane("ns", {0.0, -7.0}, {0.0, -kArm}));
    set_route_over(s, {&s.map.lanes[0], &s.map.lanes[1]});
    s.ego_spawn = {{{-kArm, 0.0}, 0.0}, tmpl.ego_speed, 0.0};

    add_decoys(s, rng);
    add_street_furniture(s, {0.0, 0.0});

    if (variant < 4) {
        CrosserSpec spec = kVariants[variant];
        spec.gap = tmpl.forced_gap >= 0.0 ? tmpl.forced_gap : spec.gap * tmpl.gap_scale;
        const double y_conflict = -20.0 + 6.0 * rng.uniform(-1.0, 1.0);
        plant_crosser(s, spec, {0.0, y_conflict});
    } else {
        // A van creeping along the right shoulder just past the turn. The
        // ego squeezes by it nominally; a steering mutation can pull it into
        // the lane.
        Scenario calibration = s;
        const ConflictCrossing cr = find_crossing(calibration, {0.0, -25.0}, {1.0, 0.0});
        const double y0 = cr.point.y + 4.0;
        s.npcs.push_back(moving_npc(s, "pullout_van", "car.van", "pullout",
                                    {-2.6, y0}, {-2.6, y0 - 70.0}, {-2.6, y0}, 1.2,
                                    std::max(0.0, cr.t - 8.0)));
    }
    return s;
}

Scenario build_unprotected_left(const ScenarioTemplate& tmpl, int variant) {
    // Ego turns left (north); oncoming traffic arrives westbound on y=3.5.
    static constexpr CrosserSpec kVariants[5] = {
        {"car.sedan", 12.0, 1.0, {-1.0, 0.0}},
        {"car.sport", 14.0, 2.3, {-1.0, 0.0}},
        {"car.sedan", 12.0, 1.4, {-1.0, 0.0}},
        {"bicycle.city", 5.0, 2.5, {-1.0, 0.0}},
        {"pedestrian.runner", 4.5, 2.8, {1.0, 0.0}},
    };
    Scenario s = base_scenario(tmpl, ScenarioFamily::UnprotectedLeft, variant);
    Rng rng(s.seed);

    s.map.lanes.push_back(make_lane("ew", {-kArm, 0.0}, {-5.0, 0.0}));
    s.map.lanes.push_back(make_lane("ns", {0.0, 7.0}, {0.0, kArm}));
    set_route_over(s, {&s.map.lanes[0], &s.map.lanes[1]});
    s.ego_spawn = {{{-kArm, 0.0}, 0.0}, tmpl.ego_speed, 0.0};

    add_decoys(s, rng);
    add_street_furniture(s, {0.0, 0.0});

    CrosserSpec spec = kVariants[variant];
    spec.gap = tmpl.forced_gap >= 0.0 ? tmpl.forced_gap : spec.gap * tmpl.gap_scale;
    if (variant == 4) {
        // Pedestrian crossing the exit road north of the junction.
        plant_crosser(s, spec, {0.0, 14.0});
    } else {
        plant_crosser(s, spec, {-1.0, 3.5});
    }
    return s;
}

Scenario build_right_turn_yield(const ScenarioTemplate& tmpl, int variant) {
    // Ego turns right (south); crossing traffic cuts across the exit road
    // just south of the junction.
    static constexpr CrosserSpec kVariants[5] = {
        {"car.sedan", 12.0, 1.1, {1.0, 0.0}},
        {"car.hatchback", 12.0, 1.3, {-1.0, 0.0}},
        {"bicycle.city", 5.0, 2.2, {1.0, 0.0}},
        {"bicycle.city", 5.0, 2.6, {-1.0, 0.0}},
        {"pedestrian.runner", 4.5, 1.7, {1.0, 0.0}},
    };
    Scenario s = base_scenario(tmpl, ScenarioFamily::RightTurnYield, variant);
    Rng rng(s.seed);

    s.map.lanes.push_back(make_lane("ew", {-kArm, 0.0}, {-5.0, 0.0}));
    s.map.lanes.push_back(make_lane("ns", {0.0, -7.0}, {0.0, -kArm}));
    set_route_over(s, {&s.map.lanes[0], &s.map.lanes[1]});
    s.ego_spawn = {{{-kArm, 0.0}, 0.0}, tmpl.ego_speed, 0.0};

    add_decoys(s, rng);
    add_street_furniture(s, {0.0, 0.0});

    CrosserSpec spec = kVariants[variant];
    spec.gap = tmpl.forced_gap >= 0.0 ? tmpl.forced_gap : spec.gap * tmpl.gap_scale;
    const double y_conflict = -14.0 + 4.0 * rng.uniform(-1.0, 1.0);
    plant_crosser(s, spec, {0.0, y_conflict});
    return s;
}

} // namespace

const char* to_string(ScenarioFamily f) {
    switch (f) {
    case ScenarioFamily::CrossingAhead: return "crossing_ahead";
    case ScenarioFamily::PostTurnObstacle: return "post_turn_obstacle";
    case ScenarioFamily::RedLightRunner: return "red_light_runner";
    case ScenarioFamily::UnprotectedLeft: return "unprotected_left";
    case ScenarioFamily::RightTurnYield: return "right_turn_yield";
    }
    return "crossing_ahead";
}

ScenarioFamily family_from_string(const std::string& s) {
    if (s == "crossing_ahead") return ScenarioFamily::CrossingAhead;
    if (s == "post_turn_obstacle") return ScenarioFamily::PostTurnObstacle;
    if (s == "red_light_runner") return ScenarioFamily::RedLightRunner;
    if (s == "unprotected_left") return ScenarioFamily::UnprotectedLeft;
    if (s == "right_turn_yield") return ScenarioFamily::RightTurnYield;
    throw UnknownVariant("unknown scenario family: " + s);
}

std::vector<ScenarioTemplate> default_templates() {
    std::vector<ScenarioTemplate> out;
    for (const ScenarioFamily family :
         {ScenarioFamily::CrossingAhead, ScenarioFamily::PostTurnObstacle,
          ScenarioFamily::RedLightRunner, ScenarioFamily::UnprotectedLeft,
          ScenarioFamily::RightTurnYield}) {
        ScenarioTemplate tmpl;
        tmpl.family = family;
        out.push_back(tmpl);
    }
    return out;
}

Scenario instantiate(const ScenarioTemplate& tmpl, int variant_index) {
    if (variant_index < 0 || variant_index >= tmpl.variant_count) {
        throw UnknownVariant(std::string(to_string(tmpl.family)) + " has no variant " +
                             std::to_string(variant_index));
    }
    switch (tmpl.family) {
    case ScenarioFamily::CrossingAhead: return build_crossing_ahead(tmpl, variant_index);
    case ScenarioFamily::PostTurnObstacle: return build_post_turn_obstacle(tmpl, variant_index);
    case ScenarioFamily::RedLightRunner: return build_red_light_runner(tmpl, variant_index);
    case ScenarioFamily::UnprotectedLeft: return build_unprotected_left(tmpl, variant_index);
    case ScenarioFamily::RightTurnYield: return build_right_turn_yield(tmpl, variant_index);
    }
    throw UnknownVariant("unhandled family");
}

std::vector<Scenario> planted_suite() {
    std::vector<Scenario> out;
    for (const auto& tmpl : default_templates()) {
        for (int v = 0; v < tmpl.variant_count; ++v) {
            out.push_back(instantiate(tmpl, v));
        }
    }
    return out;
}

} // namespace nearmiss
