#ifndef NEARMISS_SCENARIO_IO_HPP
#define NEARMISS_SCENARIO_IO_HPP

#include <string>

#include "nearmiss/scenario.hpp"

namespace nearmiss {

// Versioned JSON scenario files (schema_version 1). Serialization is
// deterministic: equal scenarios produce byte-equal text.
std::string scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const std::string& text);

void save_scenario(const Scenario& scenario, const std::string& path);
Scenario load_scenario(const std::string& path);

} // namespace nearmiss

#endif
