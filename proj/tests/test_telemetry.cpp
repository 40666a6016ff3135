#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "helpers.hpp"
#include "nearmiss/errors.hpp"
#include "nearmiss/sim.hpp"
#include "nearmiss/trace_io.hpp"

using namespace nearmiss;
using namespace nearmiss::testutil;

namespace {

// Hand-assembled trace: an NPC approaching head-on along x, then receding.
Trace synthetic_trace() {
    Trace trace;
    trace.scenario_id = "synthetic";
    trace.tick_rate = 20.0;
    trace.ego_info = {"car.sedan", ActorClass::Car, 4.6, 1.85};
    trace.npc_info["npc"] = {"car.hatchback", ActorClass::Car, 4.0, 1.8};
    for (long k = 0; k < 41; ++k) {
        TraceFrame f;
        f.tick = k;
        f.t = k / trace.tick_rate;
        f.ego.pose = {{0.0, 0.0}, 0.0};
        // Approaches until tick 20, then recedes.
        const double cx = 40.0 - std::min<long>(k, 40 - k) * 1.0;
        f.npc_states["npc"] = {{{cx, 0.0}, 0.0}, 1.0, 0.0};
        trace.frames.push_back(std::move(f));
    }
    return trace;
}

} // namespace

TEST_CASE("frame distance: 20 m centers, both ~4 m long -> ~16 m gap") {
    Trace trace;
    trace.tick_rate = 20.0;
    trace.ego_info = {"car", ActorClass::Car, 4.0, 1.8};
    trace.npc_info["a"] = {"car", ActorClass::Car, 4.0, 1.8};
    TraceFrame f;
    f.ego.pose = {{0.0, 0.0}, 0.0};
    f.npc_states["a"] = {{{20.0, 0.0}, 0.0}, 0.0, 0.0};
    trace.frames.push_back(f);
    CHECK(frame_distance(trace, trace.frames[0], "a") == doctest::Approx(16.0));
}

TEST_CASE("frame distance is zero for overlapping footprints") {
    Trace trace;
    trace.ego_info = {"car", ActorClass::Car, 4.0, 1.8};
    trace.npc_info["a"] = {"car", ActorClass::Car, 4.0, 1.8};
    TraceFrame f;
    f.ego.pose = {{0.0, 0.0}, 0.0};
    f.npc_states["a"] = {{{2.0, 0.5}, 0.4}, 0.0, 0.0};
    trace.frames.push_back(f);
    CHECK(frame_distance(trace, trace.frames[0], "a") == 0.0);
}

TEST_CASE("frame distance throws for unknown actors") {
    Trace trace = synthetic_trace();
    CHECK_THROWS_AS(frame_distance(trace, trace.frames[0], "nobody"), UnknownActor);
}

TEST_CASE("closest approach finds the turning point") {
    const Trace trace = synthetic_trace();
    const ClosestApproach ca = closest_approach(trace, "npc");
    CHECK(ca.frame == 20);
    // Centers 20 m apart minus half lengths.
    CHECK(ca.distance == doctest::Approx(20.0 - 2.3 - 2.0));
}

TEST_CASE("closest approach tie resolves to the earliest frame") {
    Trace trace = synthetic_trace();
    for (auto& f : trace.frames) {
        f.npc_states["npc"].pose.position = {15.0, 0.0};
    }
    CHECK(closest_approach(trace, "npc").frame == 0);
}

TEST_CASE("closest approach matches a full linear scan") {
    Scenario s = straight_road_scenario(200.0, 8.0);
    add_crossing_npc(s, "crosser", 80.0, 2.0, 10.0);
    const Trace trace = run(s);

    const ClosestApproach ca = closest_approach(trace, "crosser");
    long best_frame = -1;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& f : trace.frames) {
        if (f.npc_states.count("crosser") == 0) continue;
        const double d = frame_distance(trace, f, "crosser");
        if (d < best) {
            best = d;
            best_frame = f.tick;
        }
    }
    CHECK(ca.frame == best_frame);
    CHECK(ca.distance == best);
    // Lower bound property.
    for (const auto& f : trace.frames) {
        if (f.npc_states.count("crosser")) {
            CHECK(ca.distance <= frame_distance(trace, f, "crosser") + 1e-12);
        }
    }
}

TEST_CASE("ego polyline length and collinearity on a straight run") {
    Scenario s = straight_road_scenario();
    const Trace trace = run(s);
    const auto line = ego_polyline(trace);
    CHECK(line.size() == trace.frames.size());
    for (const auto& p : line) {
        CHECK(std::abs(p.y) < 1e-9);
    }

    Trace single;
    single.frames.push_back(TraceFrame{});
    CHECK(ego_polyline(single).size() == 1);
}

TEST_CASE("csv round-trip reproduces frames exactly") {
    Scenario s = straight_road_scenario(200.0, 8.0);
    add_crossing_npc(s, "crosser", 80.0, 1.5, 10.0);
    s.npcs.back().despawn_time = 12.0;
    const Trace trace = run(s);

    const auto dir = std::filesystem::temp_directory_path() / "nearmiss_trace_test";
    std::filesystem::create_directories(dir);
    const std::string csv = (dir / "t.csv").string();
    const std::string side = sidecar_path_for(csv);
    export_trace(trace, csv, side);

    const Trace back = import_trace(csv, side);
    CHECK(traces_bit_identical(trace, back));
    CHECK(back.scenario_id == trace.scenario_id);
    CHECK(back.npc_info.at("crosser").length == trace.npc_info.at("crosser").length);

    std::filesystem::remove_all(dir);
}

TEST_CASE("csv import rejects tick gaps") {
    Scenario s = straight_road_scenario();
    const Trace trace = run(s);

    std::string csv = trace_to_csv(trace);
    // Drop the second frame's row ("ego" at t=0.05).
    const auto first_nl = csv.find('\n', csv.find('\n') + 1);
    const auto second_nl = csv.find('\n', first_nl + 1);
    csv.erase(first_nl + 1, second_nl - first_nl);

    const auto dir = std::filesystem::temp_directory_path() / "nearmiss_trace_gap";
    std::filesystem::create_directories(dir);
    const std::string csv_path = (dir / "t.csv").string();
    const std::string side_path = sidecar_path_for(csv_path);
    {
        std::ofstream out(csv_path);
        out << csv;
        std::ofstream outs(side_path);
        outs << trace_sidecar_to_json(trace);
    }
    CHECK_THROWS_AS(import_trace(csv_path, side_path), ParseError);
    std::filesystem::remove_all(dir);
}
