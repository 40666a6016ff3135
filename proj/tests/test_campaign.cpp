#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "nearmiss/campaign.hpp"
#include "nearmiss/errors.hpp"
#include "nearmiss/library.hpp"
#include "nearmiss/report_io.hpp"
#include "nearmiss/sim.hpp"

using namespace nearmiss;
using namespace nearmiss::testutil;

namespace {

Scenario crossing_seed(const std::string& id, double gap, double length = 240.0) {
    Scenario s = straight_road_scenario(length, 8.0);
    s.scenario_id = id;
    add_crossing_npc(s, "crosser", 120.0, gap, 10.0);
    return s;
}

CampaignConfig quick_config(Strategy strategy, int n_rp = 2, int children = 4) {
    CampaignConfig cfg;
    cfg.strategy = strategy;
    cfg.n_rp = n_rp;
    cfg.children = children;
    cfg.repetitions = 1;
    cfg.seed = 7;
    return cfg;
}

} // namespace

TEST_CASE("auc: empty and trivial timelines") {
    CHECK(compute_auc({}) == 0.0);
    CHECK(compute_auc({{0.0, 0}}) == 0.0);
    // One failure at t=0 over a 10 s campaign.
    CHECK(compute_auc({{0.0, 1}, {10.0, 1}}) == doctest::Approx(10.0));
    // No failures.
    CHECK(compute_auc({{0.0, 0}, {10.0, 0}}) == 0.0);
}

TEST_CASE("auc: hand-computed step integrals") {
    // Failures at t=2 and t=6 over 10 s: 8 + 4.
    CHECK(compute_auc({{0.0, 0}, {2.0, 1}, {6.0, 2}, {10.0, 2}}) == doctest::Approx(12.0));
    // Three failures in a burst.
    CHECK(compute_auc({{0.0, 0}, {1.0, 3}, {5.0, 3}}) == doctest::Approx(12.0));
    // Long quiet tail.
    CHECK(compute_auc({{0.0, 0}, {9.0, 1}, {100.0, 1}}) == doctest::Approx(91.0));
    // Staircase.
    CHECK(compute_auc({{0.0, 0}, {1.0, 1}, {2.0, 2}, {3.0, 3}, {4.0, 3}}) ==
          doctest::Approx(1.0 + 2.0 + 3.0));
    // Non-integer times.
    CHECK(compute_auc({{0.0, 0}, {0.5, 1}, {2.25, 2}, {3.0, 2}}) ==
          doctest::Approx(1.75 + 1.5));
}

TEST_CASE("auc monotonicity: adding a failure never decreases the area") {
    const std::vector<TimelinePoint> base = {{0.0, 0}, {3.0, 1}, {10.0, 1}};
    const std::vector<TimelinePoint> more = {{0.0, 0}, {3.0, 1}, {7.0, 2}, {10.0, 2}};
    CHECK(compute_auc(more) >= compute_auc(base));
}

TEST_CASE("seed with no risky points produces no executions") {
    Scenario s = straight_road_scenario(240.0, 8.0);
    s.scenario_id = "empty";
    const SeedFragment f = run_seed(s, quick_config(Strategy::Forecast), 0);
    CHECK(f.risky_points_used == 0);
    CHECK(f.executions == 0);
    CHECK(f.failures() == 0);
}

TEST_CASE("n_rp clamps to the available risky points") {
    const Scenario s = crossing_seed("one_rp", 2.0);
    const SeedFragment f = run_seed(s, quick_config(Strategy::Forecast, 4, 3), 0);
    CHECK(f.risky_points_used == 1); // only one risky point exists
    CHECK(f.executions == 3);
}

TEST_CASE("budget accounting: executions equal clips times children") {
    for (const Strategy strategy :
         {Strategy::Forecast, Strategy::Random, Strategy::Proximity, Strategy::Exhaustive}) {
        const Scenario s = crossing_seed("budget", 2.0);
        CampaignConfig cfg = quick_config(strategy, 2, 3);
        const SeedFragment f = run_seed(s, cfg, 0);
        CHECK(f.executions == f.risky_points_used * cfg.children);
    }
}

TEST_CASE("collision seeds raise SeedNotFailureFree") {
    Scenario s = crossing_seed("collides", 0.0);
    s.driver.ttc_brake_threshold = 0.0;
    s.driver.standoff_distance = 0.0;
    CHECK_THROWS_AS(run_seed(s, quick_config(Strategy::Forecast), 0), SeedNotFailureFree);
}

TEST_CASE("campaign skips failing seeds and reports them") {
    Scenario bad = crossing_seed("bad", 0.0);
    bad.driver.ttc_brake_threshold = 0.0;
    bad.driver.standoff_distance = 0.0;
    const Scenario good = crossing_seed("good", 2.0);

    CampaignConfig cfg = quick_config(Strategy::Forecast, 1, 2);
    const CampaignReport report = run_campaign({bad, good}, cfg);
    REQUIRE(report.repetitions.size() == 1);
    const auto& frags = report.repetitions[0].fragments;
    REQUIRE(frags.size() == 2);
    CHECK_FALSE(frags[0].seed_failure_free);
    CHECK(frags[0].executions == 0);
    CHECK(frags[1].seed_failure_free);
}

TEST_CASE("exhaustive clip counts follow the one-per-second rule") {
    // 48 s trace with o_b = o_a = 3 yields 45 clips; a 10 s trace yields 7.
    SUBCASE("long seed") {
        Scenario s = crossing_seed("exh48", 2.0, 390.0);
        const Trace trace = run(s);
        REQUIRE(std::floor(trace.duration()) == doctest::Approx(48.0));
        CampaignConfig cfg = quick_config(Strategy::Exhaustive, 1, 1);
        cfg.o_b = 3.0;
        cfg.o_a = 3.0;
        const SeedFragment f = run_seed(s, cfg, 0);
        CHECK(f.risky_points_used + f.skipped_clips == 45);
    }
    SUBCASE("short seed") {
        Scenario s = straight_road_scenario(85.0, 8.0);
        s.scenario_id = "exh10";
        NpcScript parked;
        parked.actor_id = "bystander";
        parked.actor = ModelCatalog::builtin().require("car.van");
        parked.spawn.pose = {{40.0, 5.5}, 0.0};
        s.npcs.push_back(parked);
        const Trace trace = run(s);
        REQUIRE(std::floor(trace.duration()) == doctest::Approx(10.0));
        CampaignConfig cfg = quick_config(Strategy::Exhaustive, 1, 1);
        cfg.o_b = 3.0;
        cfg.o_a = 3.0;
        const SeedFragment f = run_seed(s, cfg, 0);
        CHECK(f.risky_points_used + f.skipped_clips == 7);
    }
}

TEST_CASE("exhaustive centers form a superset of forecast centers on the grid") {
    const Scenario s = crossing_seed("superset", 1.8);
    const Trace trace = run(s);

    CampaignConfig cfg = quick_config(Strategy::Forecast, 4, 1);
    const SeedFragment fc = run_seed(s, cfg, 0);
    cfg.strategy = Strategy::Exhaustive;
    const SeedFragment ex = run_seed(s, cfg, 0);

    std::set<long> exhaustive_seconds;
    for (const auto& rec : ex.records) {
        exhaustive_seconds.insert(std::lround(rec.rp_frame / trace.tick_rate));
    }
    for (const auto& rec : fc.records) {
        const long sec = static_cast<long>(std::floor(rec.rp_frame / trace.tick_rate));
        CHECK(exhaustive_seconds.count(sec) == 1);
    }
}

TEST_CASE("random strategy is reproducible and clamps to eligible waypoints") {
    const Scenario s = crossing_seed("rand", 2.0);
    CampaignConfig cfg = quick_config(Strategy::Random, 3, 2);
    const SeedFragment a = run_seed(s, cfg, 0);
    const SeedFragment b = run_seed(s, cfg, 0);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].rp_frame == b.records[i].rp_frame);
        CHECK(a.records[i].outcome == b.records[i].outcome);
    }
    // Different repetition, different draws.
    const SeedFragment c = run_seed(s, cfg, 1);
    bool any_diff = c.records.size() != a.records.size();
    for (std::size_t i = 0; !any_diff && i < a.records.size(); ++i) {
        any_diff = a.records[i].rp_frame != c.records[i].rp_frame;
    }
    CHECK(any_diff);
}

TEST_CASE("proximity strategy ranks by order of first appearance") {
    Scenario s = straight_road_scenario(240.0, 8.0);
    s.scenario_id = "prox";
    // Two close parked NPCs appearing at 2 s and 5 s.
    NpcScript late;
    late.actor_id = "later";
    late.actor = ModelCatalog::builtin().require("car.van");
    late.spawn.pose = {{60.0, 5.0}, 0.0};
    late.spawn_time = 5.0;
    s.npcs.push_back(late);
    NpcScript early;
    early.actor_id = "sooner";
    early.actor = ModelCatalog::builtin().require("car.van");
    early.spawn.pose = {{120.0, 5.0}, 0.0};
    early.spawn_time = 2.0;
    s.npcs.push_back(early);

    const Trace trace = run(s);
    CampaignConfig cfg = quick_config(Strategy::Proximity, 1, 1);
    const SeedFragment f = run_seed(s, cfg, 0);
    REQUIRE(f.records.size() == 1);
    // "sooner" appears first, so its closest-approach frame is the one clipped.
    const ClosestApproach ca = closest_approach(trace, "sooner");
    CHECK(f.records[0].rp_frame == ca.frame);
}

TEST_CASE("aggregate: identity for one repetition, zero variance for equal seeds") {
    const Scenario s = crossing_seed("agg", 1.3);
    CampaignConfig cfg = quick_config(Strategy::Forecast, 1, 4);
    cfg.repetitions = 1;
    const CampaignReport one = run_campaign({s}, cfg);
    CHECK(one.aggregate.executions == doctest::Approx(one.repetitions[0].executions()));
    CHECK(one.aggregate.auc == doctest::Approx(one.repetitions[0].auc));

    // Same seed for every repetition: identical fragments, zero variance.
    CampaignConfig same = cfg;
    same.repetitions = 3;
    CampaignReport rep = run_campaign({s}, same);
    // Repetition seeds differ (seed+i), so allow differences; instead check
    // the hand-computed mean.
    double mean_fail = 0.0;
    for (const auto& rr : rep.repetitions) {
        mean_fail += rr.failures();
    }
    mean_fail /= 3.0;
    CHECK(rep.aggregate.failures == doctest::Approx(mean_fail));
    const double rate = rep.aggregate.risky_points_used > 0
                            ? rep.aggregate.failures / rep.aggregate.risky_points_used
                            : 0.0;
    CHECK(rep.aggregate.failure_rate == doctest::Approx(rate));
}

TEST_CASE("timeline is nondecreasing and ends at the consumed budget") {
    const Scenario s = crossing_seed("tl", 1.3);
    CampaignConfig cfg = quick_config(Strategy::Forecast, 2, 6);
    const CampaignReport report = run_campaign({s}, cfg);
    for (const auto& rr : report.repetitions) {
        REQUIRE_FALSE(rr.timeline.empty());
        for (std::size_t i = 1; i < rr.timeline.size(); ++i) {
            CHECK(rr.timeline[i].t >= rr.timeline[i - 1].t);
            CHECK(rr.timeline[i].failures >= rr.timeline[i - 1].failures);
        }
        CHECK(rr.timeline.back().t == doctest::Approx(rr.sim_seconds()));
        CHECK(rr.timeline.back().failures == rr.failures());
    }
}

TEST_CASE("a planted near miss converts into at least one child collision") {
    // The built-in crossing family at its tightest gap, fuzzed at c=10.
    ScenarioTemplate tmpl;
    tmpl.family = ScenarioFamily::CrossingAhead;
    const Scenario s = instantiate(tmpl, 0);
    CampaignConfig cfg = quick_config(Strategy::Forecast, 4, 10);
    const SeedFragment f = run_seed(s, cfg, 0);
    CHECK(f.failures() >= 1);
}

TEST_CASE("wall-clock timeline mirrors the failure counts") {
    const Scenario s = crossing_seed("wclock", 1.3);
    CampaignConfig cfg = quick_config(Strategy::Forecast, 1, 6);
    const CampaignReport report = run_campaign({s}, cfg);
    for (const auto& rr : report.repetitions) {
        REQUIRE(rr.wall_timeline.size() == rr.timeline.size());
        for (std::size_t i = 0; i < rr.timeline.size(); ++i) {
            CHECK(rr.wall_timeline[i].failures == rr.timeline[i].failures);
            if (i > 0) {
                CHECK(rr.wall_timeline[i].t >= rr.wall_timeline[i - 1].t);
            }
        }
        CHECK(rr.wall_auc >= 0.0);
    }
    // Wall data stays out of the default report.
    CHECK(report_to_json(report).find("wall") == std::string::npos);
    CHECK(report_to_json(report, true).find("wall_timeline") != std::string::npos);
}

TEST_CASE("parallel execution yields an identical report") {
    const Scenario a = crossing_seed("par_a", 1.3);
    const Scenario b = crossing_seed("par_b", 2.0);
    CampaignConfig cfg = quick_config(Strategy::Forecast, 2, 6);
    cfg.jobs = 1;
    const CampaignReport serial = run_campaign({a, b}, cfg);
    cfg.jobs = 8;
    const CampaignReport parallel = run_campaign({a, b}, cfg);
    CHECK(report_to_json(serial) == report_to_json(parallel));
}

TEST_CASE("report serialization round trip pieces") {
    const Scenario s = crossing_seed("ser", 1.3);
    CampaignConfig cfg = quick_config(Strategy::Forecast, 1, 2);
    const CampaignReport report = run_campaign({s}, cfg);

    const std::string j = report_to_json(report);
    CHECK(j.find("\"strategy\": \"forecast\"") != std::string::npos);
    CHECK(j.find("wall") == std::string::npos);

    const std::string csv = executions_to_csv(report);
    CHECK(csv.rfind("seed_id,strategy,repetition,rp_frame,child_idx,mutation_op,outcome,"
                    "failure_type,sim_seconds\n", 0) == 0);
    // One header plus one row per execution.
    CHECK(std::count(csv.begin(), csv.end(), '\n') ==
          1 + report.repetitions[0].executions());

    const std::string curve = curve_to_csv(report);
    CHECK(curve.rfind("repetition,sim_seconds,cumulative_failures\n", 0) == 0);

    const std::string svg = curve_to_svg(report);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
}
