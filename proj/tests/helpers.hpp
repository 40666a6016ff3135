#ifndef NEARMISS_TEST_HELPERS_HPP
#define NEARMISS_TEST_HELPERS_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nearmiss/scenario.hpp"
#include "nearmiss/trace.hpp"
#include "nearmiss/types.hpp"

namespace nearmiss::testutil {

inline Lane make_lane(const std::string& prefix, Vec2 from, Vec2 to, double spacing = 5.0) {
    Lane lane;
    lane.id = prefix;
    const double len = distance(from, to);
    const int n = std::max(1, static_cast<int>(std::round(len / spacing)));
    for (int i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) / n;
        lane.waypoints.push_back({prefix + std::to_string(i), from + (to - from) * t});
    }
    return lane;
}

// Straight eastbound road with the ego spawned on the first waypoint at its
// cruise speed.
inline Scenario straight_road_scenario(double length = 150.0, double ego_speed = 8.0) {
    Scenario s;
    s.scenario_id = "test.straight";
    s.map.lanes.push_back(make_lane("e", {0.0, 0.0}, {length, 0.0}));
    const auto& lane = s.map.lanes.front();
    s.route.start_wp_id = lane.waypoints.front().id;
    s.route.end_wp_id = lane.waypoints.back().id;
    for (std::size_t i = 1; i + 1 < lane.waypoints.size(); ++i) {
        s.route.via.push_back(lane.waypoints[i].id);
    }
    s.route.target_speed = ego_speed;
    s.ego_model = ModelCatalog::builtin().require("car.sedan");
    s.ego_spawn.pose = {{0.0, 0.0}, 0.0};
    s.ego_spawn.speed = ego_speed;
    s.duration_limit = 60.0;
    return s;
}

// Plant an NPC crossing the ego lane (south to north) through (conflict_x, 0)
// so that it reaches y = 0 `gap` seconds before the ego reaches conflict_x.
// Both actors hold constant speed, so the timing is exact by construction.
inline NpcScript add_crossing_npc(Scenario& s, const std::string& actor_id, double conflict_x,
                                  double gap, double npc_speed,
                                  const std::string& model_id = "car.hatchback") {
    npc_speed = std::min(npc_speed, ModelCatalog::builtin().require(model_id).max_speed);
    const double ego_eta = (conflict_x - s.ego_spawn.pose.position.x) / s.route.target_speed;
    const double npc_eta = ego_eta - gap;
    const double start_y = -npc_speed * npc_eta;

    Lane lane = make_lane("x_" + actor_id, {conflict_x, start_y}, {conflict_x, 40.0});
    s.map.lanes.push_back(lane);

    NpcScript npc;
    npc.actor_id = actor_id;
    npc.actor = ModelCatalog::builtin().require(model_id);
    npc.spawn.pose = {{conflict_x, start_y}, std::numbers::pi / 2.0};
    npc.spawn.speed = npc_speed;
    for (std::size_t i = 1; i < lane.waypoints.size(); ++i) {
        npc.plan.push_back({lane.waypoints[i].id, npc_speed});
    }
    s.npcs.push_back(npc);
    return npc;
}

inline bool bits_equal(double a, double b) {
    return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

inline bool states_bit_identical(const KinematicState& a, const KinematicState& b) {
    return bits_equal(a.pose.position.x, b.pose.position.x) &&
           bits_equal(a.pose.position.y, b.pose.position.y) &&
           bits_equal(a.pose.heading, b.pose.heading) && bits_equal(a.speed, b.speed) &&
           bits_equal(a.yaw_rate, b.yaw_rate);
}

inline bool traces_bit_identical(const Trace& a, const Trace& b) {
    if (a.frames.size() != b.frames.size()) return false;
    for (std::size_t i = 0; i < a.frames.size(); ++i) {
        const auto& fa = a.frames[i];
        const auto& fb = b.frames[i];
        if (fa.tick != fb.tick || !bits_equal(fa.t, fb.t)) return false;
        if (!states_bit_identical(fa.ego, fb.ego)) return false;
        if (fa.npc_states.size() != fb.npc_states.size()) return false;
        auto ita = fa.npc_states.begin();
        auto itb = fb.npc_states.begin();
        for (; ita != fa.npc_states.end(); ++ita, ++itb) {
            if (ita->first != itb->first || !states_bit_identical(ita->second, itb->second)) {
                return false;
            }
        }
    }
    if (a.outcome.kind != b.outcome.kind || a.outcome.frame != b.outcome.frame) return false;
    if (a.outcome.failure_type != b.outcome.failure_type) return false;
    if (a.outcome.other_id != b.outcome.other_id) return false;
    return true;
}

} // namespace nearmiss::testutil

#endif
