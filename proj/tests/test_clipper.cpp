#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "nearmiss/clipper.hpp"
#include "nearmiss/errors.hpp"
#include "nearmiss/scenario_io.hpp"
#include "nearmiss/sim.hpp"

using namespace nearmiss;
using namespace nearmiss::testutil;

namespace {

struct ClipFixture {
    Scenario parent;
    Trace trace;
    RiskyPoint rp;
};

ClipFixture crossing_fixture(double gap = 2.0) {
    ClipFixture fx;
    fx.parent = straight_road_scenario(240.0, 8.0);
    fx.parent.scenario_id = "fixture.crossing";
    add_crossing_npc(fx.parent, "crosser", 120.0, gap, 10.0);
    fx.trace = run(fx.parent);
    REQUIRE(fx.trace.outcome.kind == OutcomeKind::Completed);
    const ForecastResult fc = forecast(fx.trace, {}, {});
    REQUIRE_FALSE(fc.risky_points.empty());
    fx.rp = fc.risky_points.front();
    return fx;
}

double replay_rms(const Trace& parent_trace, const ClippedScenario& clipped) {
    const Trace replay = run(clipped.scenario);
    const long start = clipped.window.start_frame;
    const long window_len = clipped.window.end_frame - start;
    const long n = std::min<long>(window_len + 1, static_cast<long>(replay.frames.size()));
    REQUIRE(n > window_len / 2); // the replay must cover most of the window
    double sum = 0.0;
    for (long i = 0; i < n; ++i) {
        const Vec2 a = parent_trace.frames[start + i].ego.pose.position;
        const Vec2 b = replay.frames[i].ego.pose.position;
        sum += dot(a - b, a - b);
    }
    return std::sqrt(sum / n);
}

} // namespace

TEST_CASE("window arithmetic: o_b=o_a=3 spans 120 ticks at 20 Hz") {
    ClipFixture fx = crossing_fixture();
    const ClippedScenario clipped = clip(fx.parent, fx.trace, fx.rp, 3.0, 3.0);
    CHECK(clipped.window.end_frame - clipped.window.start_frame == 120);
    CHECK(clipped.window.rp_frame >= clipped.window.start_frame);
    CHECK(clipped.window.rp_frame <= clipped.window.end_frame);
    CHECK(clipped.scenario.duration_limit == doctest::Approx(18.0));
}

TEST_CASE("window start clamps to frame zero for early risky points") {
    ClipFixture fx = crossing_fixture();
    const ClippedScenario clipped = clip_at_frame(fx.parent, fx.trace, 30, 3.0, 3.0);
    CHECK(clipped.window.start_frame == 0);
    CHECK(clipped.window.end_frame == 90);
}

TEST_CASE("degenerate windows are rejected") {
    ClipFixture fx = crossing_fixture();
    Trace tiny = fx.trace;
    tiny.frames.resize(15); // 0.75 s of recording
    CHECK_THROWS_AS(clip_at_frame(fx.parent, tiny, 10, 3.0, 3.0), WindowDegenerate);
}

TEST_CASE("reconstruction: spawn states equal recorded states to the bit") {
    ClipFixture fx = crossing_fixture();
    const ClippedScenario clipped = clip(fx.parent, fx.trace, fx.rp, 3.0, 3.0);
    const TraceFrame& start = fx.trace.frames[clipped.window.start_frame];

    CHECK(states_bit_identical(clipped.scenario.ego_spawn, start.ego));
    for (const auto& npc : clipped.scenario.npcs) {
        const auto it = start.npc_states.find(npc.actor_id);
        REQUIRE(it != start.npc_states.end());
        CHECK(states_bit_identical(npc.spawn, it->second));
        CHECK(npc.spawn_time == 0.0);
    }
}

TEST_CASE("relevant NPCs have their closest approach inside the window") {
    ClipFixture fx = crossing_fixture();
    const ClippedScenario clipped = clip(fx.parent, fx.trace, fx.rp, 5.0, 5.0);
    REQUIRE_FALSE(clipped.relevant_npcs.empty());
    for (const auto& rel : clipped.relevant_npcs) {
        CHECK(rel.closest_frame >= clipped.window.start_frame);
        CHECK(rel.closest_frame <= clipped.window.end_frame);
        const ClosestApproach ca = closest_approach(fx.trace, rel.actor_id);
        CHECK(ca.frame == rel.closest_frame);
    }
}

TEST_CASE("end waypoint snaps forward along the route") {
    ClipFixture fx = crossing_fixture();
    const ClippedScenario clipped = clip(fx.parent, fx.trace, fx.rp, 3.0, 3.0);
    const Scenario& cs = clipped.scenario;

    const Vec2 end_pos =
        fx.trace.frames[clipped.window.end_frame].ego.pose.position;
    const Vec2 end_wp = cs.map.require_waypoint(cs.route.end_wp_id).position;
    CHECK(distance(end_wp, end_pos) <= 30.0);
    // Forward preference: the chosen waypoint is not behind the ego.
    CHECK(end_wp.x >= end_pos.x - 1.0);
    // The synthetic start waypoint sits exactly at the recorded location.
    const Vec2 start_wp = cs.map.require_waypoint(cs.route.start_wp_id).position;
    CHECK(bits_equal(start_wp.x, cs.ego_spawn.pose.position.x));
    CHECK(bits_equal(start_wp.y, cs.ego_spawn.pose.position.y));
}

TEST_CASE("no valid end waypoint raises") {
    ClipFixture fx = crossing_fixture();
    // Hand-built trace that wanders 60 m off the route by the window end.
    Trace wander = fx.trace;
    for (std::size_t i = 0; i < wander.frames.size(); ++i) {
        wander.frames[i].ego.pose.position = {20.0 + 0.05 * i, 0.4 * i};
    }
    CHECK_THROWS_AS(clip_at_frame(fx.parent, wander, 200, 3.0, 3.0), NoValidEndWaypoint);
}

TEST_CASE("unmutated clip replays the original window within 0.1 m RMS") {
    ClipFixture fx = crossing_fixture();
    for (const double o : {3.0, 5.0}) {
        const ClippedScenario clipped = clip(fx.parent, fx.trace, fx.rp, o, o);
        CHECK(replay_rms(fx.trace, clipped) <= 0.1);
    }
}

TEST_CASE("trigger and despawn times shift into clip time") {
    Scenario parent = straight_road_scenario(240.0, 8.0);
    parent.scenario_id = "fixture.trigger";
    add_crossing_npc(parent, "late", 150.0, 2.0, 10.0);
    // Delay the crosser: hold for 8 s, then go.
    NpcScript& npc = parent.npcs.back();
    npc.trigger_time = 8.0;
    npc.spawn.speed = 0.0;
    // Re-time the start so it still clears ahead of the ego: the ego reaches
    // x=150 at ~18.75 s, the NPC needs (18.75 - 2 - 8) * 10 = 87.5 m of run-up
    // plus acceleration lag; accept whatever gap results, the point here is
    // time bookkeeping.
    const Trace trace = run(parent);

    const ClippedScenario clipped = clip_at_frame(parent, trace, 120, 3.0, 3.0);
    const NpcScript* kept = clipped.scenario.find_npc("late");
    REQUIRE(kept != nullptr);
    // Window starts at tick 60 = 3 s; the 8 s trigger becomes 5 s.
    CHECK(kept->trigger_time == doctest::Approx(5.0));
}

TEST_CASE("clipping a clip with the same window is stable") {
    ClipFixture fx = crossing_fixture();
    // Interior risky point: both offsets stay unclamped.
    const ClippedScenario c1 = clip(fx.parent, fx.trace, fx.rp, 3.0, 3.0);
    const Trace t1 = run(c1.scenario);
    const long rp_in_clip = fx.rp.frame - c1.window.start_frame;
    const ClippedScenario c2 = clip_at_frame(c1.scenario, t1, rp_in_clip, 3.0, 3.0);

    const auto normalize = [](Scenario s) {
        s.scenario_id.clear();
        s.clip.reset();
        s.mutation.reset();
        return scenario_to_json(s);
    };
    CHECK(normalize(c1.scenario) == normalize(c2.scenario));
}

TEST_CASE("spawn validity check") {
    Scenario s = straight_road_scenario();
    const auto add_car = [&s](const std::string& id, Vec2 pos) {
        NpcScript npc;
        npc.actor_id = id;
        npc.actor = ModelCatalog::builtin().require("car.hatchback");
        npc.spawn.pose = {pos, 0.0};
        s.npcs.push_back(npc);
    };

    SUBCASE("npcs 10 m apart are fine") {
        add_car("a", {30.0, 5.0});
        add_car("b", {40.0, 5.0});
        CHECK(spawn_validity_check(s).empty());
    }
    SUBCASE("two 4 m cars 3 m apart overlap") {
        add_car("a", {30.0, 5.0});
        add_car("b", {33.0, 5.0});
        const auto violations = spawn_validity_check(s);
        REQUIRE(violations.size() == 1);
        CHECK(violations[0].kind == "actor_overlap");
        CHECK(violations[0].first == "a");
        CHECK(violations[0].second == "b");
    }
    SUBCASE("spawn inside an exclusion zone is tagged phantom") {
        s.map.exclusion_zones.push_back({"sensor", {{30.0, 5.0}, 0.0, 3.0, 3.0}});
        add_car("a", {30.0, 5.0});
        const auto violations = spawn_validity_check(s);
        REQUIRE(violations.size() == 1);
        CHECK(violations[0].kind == "phantom_zone");
        CHECK(violations[0].second == "sensor");
    }
    SUBCASE("spawn on a static obstacle is flagged") {
        s.map.static_obstacles.push_back({"wall", "pavement", {{30.0, 5.0}, 0.0, 6.0, 1.0}});
        add_car("a", {30.0, 5.0});
        const auto violations = spawn_validity_check(s);
        REQUIRE(violations.size() == 1);
        CHECK(violations[0].kind == "static_overlap");
    }
    SUBCASE("future spawns are not checked at t=0") {
        add_car("a", {30.0, 5.0});
        add_car("b", {30.5, 5.0});
        s.npcs.back().spawn_time = 4.0;
        CHECK(spawn_validity_check(s).empty());
    }
}

TEST_CASE("clip files round-trip through the scenario schema") {
    ClipFixture fx = crossing_fixture();
    const ClippedScenario clipped = clip(fx.parent, fx.trace, fx.rp, 5.0, 5.0);
    const std::string text = scenario_to_json(clipped.scenario);
    const Scenario loaded = scenario_from_json(text);
    REQUIRE(loaded.clip.has_value());
    const ClippedScenario back = clipped_from_scenario(loaded);
    CHECK(back.parent_id == clipped.parent_id);
    CHECK(back.window.start_frame == clipped.window.start_frame);
    CHECK(back.window.end_frame == clipped.window.end_frame);
    REQUIRE(back.relevant_npcs.size() == clipped.relevant_npcs.size());
    CHECK(back.relevant_npcs[0].actor_id == clipped.relevant_npcs[0].actor_id);
    CHECK(scenario_to_json(back.scenario) == text);
}
