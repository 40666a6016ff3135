#include "nearmiss/scenario_io.hpp"

#include <fstream>

#include <json.hpp>

#include "nearmiss/errors.hpp"

namespace nearmiss {

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

json to_json(const Vec2& v) { return json{{"x", v.x}, {"y", v.y}}; }
Vec2 vec2_from(const json& j) { return {j.at("x").get<double>(), j.at("y").get<double>()}; }

json to_json(const OrientedBox& b) {
    return json{{"x", b.center.x},
                {"y", b.center.y},
                {"heading", b.heading},
                {"length", b.length},
                {"width", b.width}};
}

OrientedBox box_from(const json& j) {
    return {{j.at("x").get<double>(), j.at("y").get<double>()},
            j.at("heading").get<double>(),
            j.at("length").get<double>(),
            j.at("width").get<double>()};
}

json to_json(const ActorModel& m) {
    return json{{"model_id", m.model_id}, {"class", to_string(m.actor_class)},
                {"length", m.length},     {"width", m.width},
                {"max_speed", m.max_speed}, {"max_accel", m.max_accel},
                {"max_decel", m.max_decel}, {"max_steer", m.max_steer}};
}

ActorModel model_from(const json& j) {
    ActorModel m;
    m.model_id = j.at("model_id").get<std::string>();
    m.actor_class = actor_class_from_string(j.at("class").get<std::string>());
    m.length = j.at("length").get<double>();
    m.width = j.at("width").get<double>();
    m.max_speed = j.at("max_speed").get<double>();
    m.max_accel = j.at("max_accel").get<double>();
    m.max_decel = j.at("max_decel").get<double>();
    m.max_steer = j.at("max_steer").get<double>();
    return m;
}

json to_json(const KinematicState& s) {
    return json{{"x", s.pose.position.x},
                {"y", s.pose.position.y},
                {"heading", s.pose.heading},
                {"speed", s.speed},
                {"yaw_rate", s.yaw_rate}};
}

KinematicState state_from(const json& j) {
    KinematicState s;
    s.pose.position = {j.at("x").get<double>(), j.at("y").get<double>()};
    s.pose.heading = j.at("heading").get<double>();
    s.speed = j.at("speed").get<double>();
    s.yaw_rate = j.at("yaw_rate").get<double>();
    return s;
}

json to_json(const ClipInfo& c) {
    json npcs = json::array();
    for (const auto& r : c.relevant_npcs) {
        npcs.push_back(json{{"actor_id", r.actor_id},
                            {"closest_frame", r.closest_frame},
                            {"min_window_distance", r.min_window_distance},
                            {"start_distance", r.start_distance}});
    }
    return json{{"parent_id", c.parent_id},
                {"rp_frame", c.window.rp_frame},
                {"o_b", c.window.o_b},
                {"o_a", c.window.o_a},
                {"start_frame", c.window.start_frame},
                {"end_frame", c.window.end_frame},
                {"relevant_npcs", npcs}};
}

ClipInfo clip_from(const json& j) {
    ClipInfo c;
    c.parent_id = j.at("parent_id").get<std::string>();
    c.window.rp_frame = j.at("rp_frame").get<long>();
    c.window.o_b = j.at("o_b").get<double>();
    c.window.o_a = j.at("o_a").get<double>();
    c.window.start_frame = j.at("start_frame").get<long>();
    c.window.end_frame = j.at("end_frame").get<long>();
    for (const auto& r : j.at("relevant_npcs")) {
        c.relevant_npcs.push_back({r.at("actor_id").get<std::string>(),
                                   r.at("closest_frame").get<long>(),
                                   r.at("min_window_distance").get<double>(),
                                   r.at("start_distance").get<double>()});
    }
    return c;
}

json to_json(const MutationInfo& m) {
    return json{{"parent_id", m.parent_id},   {"op", m.op},
                {"actor_id", m.actor_id},     {"new_model_id", m.new_model_id},
                {"steering_value", m.steering_value}, {"seed", m.seed},
                {"child_index", m.child_index}};
}

MutationInfo mutation_from(const json& j) {
    MutationInfo m;
    m.parent_id = j.at("parent_id").get<std::string>();
    m.op = j.at("op").get<std::string>();
    m.actor_id = j.at("actor_id").get<std::string>();
    m.new_model_id = j.at("new_model_id").get<std::string>();
    m.steering_value = j.at("steering_value").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.child_index = j.at("child_index").get<int>();
    return m;
}

} // namespace

std::string scenario_to_json(const Scenario& s) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["scenario_id"] = s.scenario_id;
    j["seed"] = s.seed;
    j["tick_rate"] = s.tick_rate;
    j["duration_limit"] = s.duration_limit;

    json lanes = json::array();
    for (const auto& lane : s.map.lanes) {
        json wps = json::array();
        for (const auto& wp : lane.waypoints) {
            json w = to_json(wp.position);
            w["id"] = wp.id;
            wps.push_back(std::move(w));
        }
        lanes.push_back(json{{"id", lane.id}, {"waypoints", wps}});
    }
    json statics = json::array();
    for (const auto& so : s.map.static_obstacles) {
        json o = to_json(so.box);
        o["id"] = so.id;
        o["tag"] = so.tag;
        statics.push_back(std::move(o));
    }
    json zones = json::array();
    for (const auto& z : s.map.exclusion_zones) {
        json o = to_json(z.box);
        o["id"] = z.id;
        zones.push_back(std::move(o));
    }
    j["map"] = json{{"lane_width", s.map.lane_width},
                    {"lanes", lanes},
                    {"static_obstacles", statics},
                    {"exclusion_zones", zones}};

    j["route"] = json{{"start", s.route.start_wp_id},
                      {"end", s.route.end_wp_id},
                      {"via", s.route.via},
                      {"target_speed", s.route.target_speed}};

    j["ego"] = json{{"model", to_json(s.ego_model)}, {"spawn", to_json(s.ego_spawn)}};

    j["driver"] = json{{"ttc_brake_threshold", s.driver.ttc_brake_threshold},
                       {"ttc_horizon", s.driver.ttc_horizon},
                       {"lookahead_min", s.driver.lookahead_min},
                       {"lookahead_gain", s.driver.lookahead_gain},
                       {"standoff_distance", s.driver.standoff_distance},
                       {"speed_gain", s.driver.speed_gain}};

    json npcs = json::array();
    for (const auto& npc : s.npcs) {
        json n;
        n["actor_id"] = npc.actor_id;
        n["model"] = to_json(npc.actor);
        n["spawn"] = to_json(npc.spawn);
        json plan = json::array();
        for (const auto& step : npc.plan) {
            plan.push_back(json{{"waypoint", step.waypoint_id},
                                {"target_speed", step.target_speed}});
        }
        n["plan"] = plan;
        n["spawn_time"] = npc.spawn_time;
        n["trigger_time"] = npc.trigger_time;
        if (npc.despawn_time) {
            n["despawn_time"] = *npc.despawn_time;
        }
        if (npc.steering_override) {
            n["steering_override"] = *npc.steering_override;
            n["steering_mode"] = npc.steering_offset_mode ? "offset" : "replace";
        }
        npcs.push_back(std::move(n));
    }
    j["npcs"] = npcs;

    if (s.clip) {
        j["clip"] = to_json(*s.clip);
    }
    if (s.mutation) {
        j["mutation"] = to_json(*s.mutation);
    }
    return j.dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("scenario JSON: ") + e.what());
    }
    try {
        if (j.at("schema_version").get<int>() != kSchemaVersion) {
            throw ParseError("unsupported schema_version");
        }
        Scenario s;
        s.scenario_id = j.at("scenario_id").get<std::string>();
        s.seed = j.at("seed").get<std::uint64_t>();
        s.tick_rate = j.at("tick_rate").get<double>();
        s.duration_limit = j.at("duration_limit").get<double>();

        const json& map = j.at("map");
        s.map.lane_width = map.at("lane_width").get<double>();
        for (const auto& lane_j : map.at("lanes")) {
            Lane lane;
            lane.id = lane_j.at("id").get<std::string>();
            for (const auto& wp : lane_j.at("waypoints")) {
                lane.waypoints.push_back({wp.at("id").get<std::string>(), vec2_from(wp)});
            }
            s.map.lanes.push_back(std::move(lane));
        }
        for (const auto& so : map.at("static_obstacles")) {
            s.map.static_obstacles.push_back({so.at("id").get<std::string>(),
                                              so.at("tag").get<std::string>(), box_from(so)});
        }
        for (const auto& z : map.at("exclusion_zones")) {
            s.map.exclusion_zones.push_back({z.at("id").get<std::string>(), box_from(z)});
        }

        const json& route = j.at("route");
        s.route.start_wp_id = route.at("start").get<std::string>();
        s.route.end_wp_id = route.at("end").get<std::string>();
        s.route.via = route.at("via").get<std::vector<std::string>>();
        s.route.target_speed = route.at("target_speed").get<double>();

        s.ego_model = model_from(j.at("ego").at("model"));
        s.ego_spawn = state_from(j.at("ego").at("spawn"));

        const json& d = j.at("driver");
        s.driver.ttc_brake_threshold = d.at("ttc_brake_threshold").get<double>();
        s.driver.ttc_horizon = d.at("ttc_horizon").get<double>();
        s.driver.lookahead_min = d.at("lookahead_min").get<double>();
        s.driver.lookahead_gain = d.at("lookahead_gain").get<double>();
        s.driver.standoff_distance = d.at("standoff_distance").get<double>();
        s.driver.speed_gain = d.at("speed_gain").get<double>();

        for (const auto& n : j.at("npcs")) {
            NpcScript npc;
            npc.actor_id = n.at("actor_id").get<std::string>();
            npc.actor = model_from(n.at("model"));
            npc.spawn = state_from(n.at("spawn"));
            for (const auto& step : n.at("plan")) {
                npc.plan.push_back({step.at("waypoint").get<std::string>(),
                                    step.at("target_speed").get<double>()});
            }
            npc.spawn_time = n.at("spawn_time").get<double>();
            npc.trigger_time = n.at("trigger_time").get<double>();
            if (n.contains("despawn_time")) {
                npc.despawn_time = n.at("despawn_time").get<double>();
            }
            if (n.contains("steering_override")) {
                npc.steering_override = n.at("steering_override").get<double>();
                npc.steering_offset_mode =
                    n.value("steering_mode", std::string("replace")) == "offset";
            }
            s.npcs.push_back(std::move(npc));
        }

        if (j.contains("clip")) {
            s.clip = clip_from(j.at("clip"));
        }
        if (j.contains("mutation")) {
            s.mutation = mutation_from(j.at("mutation"));
        }
        return s;
    } catch (const json::exception& e) {
        throw ParseError(std::string("scenario JSON: ") + e.what());
    }
}

void save_scenario(const Scenario& scenario, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("cannot open for writing: " + path);
    }
    out << scenario_to_json(scenario);
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open scenario file: " + path);
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return scenario_from_json(text);
}

} // namespace nearmiss
