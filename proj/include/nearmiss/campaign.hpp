#ifndef NEARMISS_CAMPAIGN_HPP
#define NEARMISS_CAMPAIGN_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nearmiss/forecaster.hpp"
#include "nearmiss/mutator.hpp"
#include "nearmiss/scenario.hpp"

namespace nearmiss {

enum class Strategy { Forecast, Random, Exhaustive, Proximity };

const char* to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

struct CampaignConfig {
    Strategy strategy = Strategy::Forecast;
    double o_b = 5.0; // s
    double o_a = 5.0; // s
    int n_rp = 4;
    int children = 10;
    int repetitions = 3;
    std::uint64_t seed = 1;
    int jobs = 1;
    ProximityThresholds thresholds;
    double critical_distance = 2.0;  // m
    int n_perturbations = 20;
    double speed_error_bound = 0.5;     // m/s
    double yaw_rate_error_bound = 0.02; // rad/s
    bool steering_offset_mode = false;

    PerturbationConfig perturbation(std::uint64_t derived_seed) const {
        PerturbationConfig p;
        p.n_perturbations = n_perturbations;
        p.speed_error_bound = speed_error_bound;
        p.yaw_rate_error_bound = yaw_rate_error_bound;
        p.critical_distance = critical_distance;
        p.seed = derived_seed;
        return p;
    }
};

// One row per child execution, exported to the campaign CSV.
struct ExecutionRecord {
    std::string seed_id;
    Strategy strategy = Strategy::Forecast;
    int repetition = 0;
    long rp_frame = 0;
    int child_index = 0;
    std::string mutation_op;
    OutcomeKind outcome = OutcomeKind::Completed;
    std::optional<FailureType> failure_type;
    double sim_seconds = 0.0;
    double wall_seconds = 0.0; // diagnostic; feeds the wall-clock timeline only
};

// Counters indexed by FailureType.
using FailureCounts = std::array<int, 5>;

struct SeedFragment {
    std::string seed_id;
    bool seed_failure_free = true;
    int risky_points_used = 0; // clips that produced children
    int skipped_clips = 0;     // degenerate windows or no mutation target
    int executions = 0;
    FailureCounts failures_by_type{};
    int stuck = 0;
    double sim_seconds = 0.0;  // seed run + all children
    double wall_seconds = 0.0; // measured; machine-dependent
    std::vector<ExecutionRecord> records;

    int failures() const;
};

struct TimelinePoint {
    double t = 0.0;   // cumulative simulated seconds consumed
    int failures = 0; // cumulative failures discovered by then
};

struct RepetitionReport {
    int repetition = 0;
    std::vector<SeedFragment> fragments;
    // Canonical order (fragment, clip, child); last point marks campaign end.
    std::vector<TimelinePoint> timeline;
    double auc = 0.0;
    // Same curve over cumulative measured wall seconds. Machine-dependent,
    // reported only in wall-clock mode.
    std::vector<TimelinePoint> wall_timeline;
    double wall_auc = 0.0;

    int risky_points_used() const;
    int executions() const;
    FailureCounts failures_by_type() const;
    int failures() const;
    int stuck() const;
    double sim_seconds() const;
};

struct CampaignAggregate {
    double risky_points_used = 0.0;
    double executions = 0.0;
    std::array<double, 5> failures_by_type{};
    double failures = 0.0;
    double stuck = 0.0;
    double failure_rate = 0.0; // mean failures / mean risky points
    double sim_seconds = 0.0;
    double auc = 0.0;
};

struct CampaignReport {
    CampaignConfig config;
    std::vector<RepetitionReport> repetitions;
    CampaignAggregate aggregate;
    double wall_time = 0.0; // diagnostic only, not serialized by default
};

// Right-continuous step integral of the cumulative-failure curve: each
// failure counts from its discovery time to the end of the timeline.
double compute_auc(const std::vector<TimelinePoint>& timeline);

// Strategy pass over one seed scenario: run the seed, pick risky frames per
// the strategy, clip, mutate, execute children, tally. Throws
// SeedNotFailureFree when the seed run collides.
SeedFragment run_seed(const Scenario& seed_scenario, const CampaignConfig& cfg,
                      int repetition);

// Full campaign: repetitions x seeds, aggregated. Failing seeds are reported
// and skipped. Deterministic for a given config regardless of cfg.jobs.
CampaignReport run_campaign(const std::vector<Scenario>& seeds, const CampaignConfig& cfg);

CampaignAggregate aggregate(const std::vector<RepetitionReport>& repetitions);

} // namespace nearmiss

#endif
