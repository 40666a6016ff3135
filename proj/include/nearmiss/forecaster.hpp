#ifndef NEARMISS_FORECASTER_HPP
#define NEARMISS_FORECASTER_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "nearmiss/trace.hpp"

namespace nearmiss {

enum class NpcCategory {
    Discarded,
    NonCritical,
    NonCrossing, // transient: close but not crossing, before criticality analysis
    Crossing,
    Critical,
    CriticalCrossing,
};

const char* to_string(NpcCategory c);

struct RiskyPoint {
    std::string actor_id;
    long frame = 0; // tick of closest approach
    NpcCategory category = NpcCategory::Crossing;
    ActorClass actor_class = ActorClass::Car;
    double closest_distance = 0.0; // m
    int score = 0;                 // ordinal rank, 0 = riskiest
};

struct ProximityThresholds {
    double th_vehicle = 10.0;    // m, cars and bicycles
    double th_pedestrian = 50.0; // m
};

struct PerturbationConfig {
    int n_perturbations = 20;
    double speed_error_bound = 0.5;     // m/s
    double yaw_rate_error_bound = 0.02; // rad/s
    double critical_distance = 2.0;     // m
    std::uint64_t seed = 0;
    bool bias_mode = false; // one constant offset per trajectory instead of white noise
};

struct ProximityResult {
    std::vector<ClosestApproach> close; // ordered by actor id
    std::set<std::string> discarded;
};

// Step 1a: NPCs whose closest approach falls inside the class radius.
// Throws NotFailureFree when the trace ended in a collision.
ProximityResult identify_proximity(const Trace& trace, double th_vehicle,
                                   double th_pedestrian);

struct CrossingResult {
    std::set<std::string> crossing;
    std::set<std::string> critical_crossing; // subset of crossing
    std::set<std::string> non_crossing;
};

// Step 1b: crossing = the NPC position polyline intersects the ego polyline
// anywhere (untimed); critical crossing additionally requires the timed
// closest approach to be within critical_distance.
CrossingResult identify_crossing(const Trace& trace, const ProximityResult& close,
                                 double critical_distance);

// Step 1c support: re-integrate the ego trajectory from its recorded speed
// and yaw-rate sequences, each value perturbed by a uniform draw within the
// configured bounds. Deterministic in (cfg.seed, k). With zero bounds the
// output equals the recorded trajectory bit-exactly.
std::vector<Vec2> perturb_ego_trajectory(const Trace& trace, const PerturbationConfig& cfg,
                                         int k);

struct CriticalityResult {
    std::set<std::string> critical;
    std::set<std::string> non_critical;
};

// Step 1c: a non-crossing NPC is critical when some perturbed ego trajectory
// passes within critical_distance (center to center) of the NPC's recorded
// position at the same frame.
CriticalityResult analyze_non_crossing(const Trace& trace,
                                       const std::set<std::string>& non_crossing,
                                       const PerturbationConfig& cfg);

// Step 1d: category tiers CriticalCrossing > Critical > Crossing; inside a
// tier pedestrians first, then by ascending closest distance, then actor id.
std::vector<RiskyPoint> rank(const Trace& trace, const ProximityResult& close,
                             const CrossingResult& crossing,
                             const CriticalityResult& criticality);

struct ForecastResult {
    std::vector<RiskyPoint> risky_points;
    std::map<std::string, NpcCategory> categories; // terminal category per NPC
};

ForecastResult forecast(const Trace& trace, const ProximityThresholds& thresholds,
                        const PerturbationConfig& cfg);

} // namespace nearmiss

#endif
