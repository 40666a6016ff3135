#ifndef NEARMISS_REPORT_IO_HPP
#define NEARMISS_REPORT_IO_HPP

#include <string>
#include <vector>

#include "nearmiss/campaign.hpp"
#include "nearmiss/forecaster.hpp"

namespace nearmiss {

// Ranked risky points as JSON (actor, frame, category, distance, rank).
std::string risky_points_to_json(const std::string& scenario_id,
                                 const std::vector<RiskyPoint>& rps);
std::vector<RiskyPoint> risky_points_from_json(const std::string& text);

// Campaign report as deterministic JSON. Wall-clock data is omitted unless
// include_wall_clock is set (which breaks byte-reproducibility by nature).
std::string report_to_json(const CampaignReport& report, bool include_wall_clock = false);

// One CSV row per child execution.
std::string executions_to_csv(const CampaignReport& report);

// Cumulative-failure curve, one row per timeline point per repetition.
std::string curve_to_csv(const CampaignReport& report);

// Simple SVG rendering of the cumulative-failure curves.
std::string curve_to_svg(const CampaignReport& report);

void write_file(const std::string& path, const std::string& content);

} // namespace nearmiss

#endif
