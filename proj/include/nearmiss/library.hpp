#ifndef NEARMISS_LIBRARY_HPP
#define NEARMISS_LIBRARY_HPP

#include <string>
#include <vector>

#include "nearmiss/scenario.hpp"

namespace nearmiss {

enum class ScenarioFamily {
    CrossingAhead,
    PostTurnObstacle,
    RedLightRunner,
    UnprotectedLeft,
    RightTurnYield,
};

const char* to_string(ScenarioFamily f);
ScenarioFamily family_from_string(const std::string& s);

// Parameterized scenario family. Variants vary the crossing actor, its
// speed, the planted timing gap and spawn offsets; equal (template, index)
// pairs instantiate identical scenarios.
struct ScenarioTemplate {
    ScenarioFamily family = ScenarioFamily::CrossingAhead;
    int variant_count = 5;
    double ego_speed = 8.0;      // m/s cruise target
    double gap_scale = 1.0;      // scales every planted timing gap
    std::uint64_t seed = 1;

    // Fixed gap override: when >= 0 every variant plants this gap (s).
    // Used by tests to force conflict seeds (gap 0 collides).
    double forced_gap = -1.0;
};

// Built-in template per family, in a fixed order.
std::vector<ScenarioTemplate> default_templates();

// Concrete deterministic scenario. Throws UnknownVariant when variant_index
// is outside the template's declared count.
Scenario instantiate(const ScenarioTemplate& tmpl, int variant_index);

// The full planted suite: every variant of every default template.
std::vector<Scenario> planted_suite();

} // namespace nearmiss

#endif
