#ifndef NEARMISS_CLIPPER_HPP
#define NEARMISS_CLIPPER_HPP

#include <string>
#include <vector>

#include "nearmiss/forecaster.hpp"
#include "nearmiss/scenario.hpp"
#include "nearmiss/trace.hpp"

namespace nearmiss {

struct ClippedScenario {
    std::string parent_id;
    ClipWindow window;
    std::vector<RelevantNpc> relevant_npcs;
    Scenario scenario; // carries the same data in scenario.clip
};

// Reconstruct a short runnable scenario around a risky frame: the ego
// respawns exactly as recorded at the window start (a synthetic start
// waypoint marks the spot), NPCs present at the window start respawn from
// their recorded states and resume their scripts, and the route ends at the
// nearest forward route waypoint to the recorded ego location at the window
// end. Throws WindowDegenerate when the clamped window is shorter than 1 s
// and NoValidEndWaypoint when no route waypoint lies within 30 m.
ClippedScenario clip_at_frame(const Scenario& parent, const Trace& trace, long rp_frame,
                              double o_b, double o_a,
                              const ProximityThresholds& thresholds = {});

ClippedScenario clip(const Scenario& parent, const Trace& trace, const RiskyPoint& rp,
                     double o_b, double o_a, const ProximityThresholds& thresholds = {});

// Rebuild the ClippedScenario view from a scenario whose clip annotation is
// set (e.g. after loading a clip file). Throws ParseError when absent.
ClippedScenario clipped_from_scenario(Scenario scenario);

struct SpawnViolation {
    std::string kind; // "actor_overlap" | "static_overlap" | "phantom_zone"
    std::string first;
    std::string second;
};

// Diagnostic check on the initial state: overlapping actor footprints at
// t=0, spawns intersecting static obstacles, and spawns inside exclusion
// zones (the phantom-object analog).
std::vector<SpawnViolation> spawn_validity_check(const Scenario& scenario);

} // namespace nearmiss

#endif
