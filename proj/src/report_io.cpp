#include "nearmiss/report_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "nearmiss/errors.hpp"

namespace nearmiss {

namespace {

using nlohmann::json;

NpcCategory category_from_string(const std::string& s) {
    if (s == "crossing") return NpcCategory::Crossing;
    if (s == "critical") return NpcCategory::Critical;
    if (s == "critical_crossing") return NpcCategory::CriticalCrossing;
    if (s == "non_critical") return NpcCategory::NonCritical;
    if (s == "non_crossing") return NpcCategory::NonCrossing;
    if (s == "discarded") return NpcCategory::Discarded;
    throw ParseError("unknown npc category: " + s);
}

json fragment_to_json(const SeedFragment& f) {
    json counts = json::object();
    for (int i = 0; i < 5; ++i) {
        counts[to_string(static_cast<FailureType>(i))] = f.failures_by_type[i];
    }
    return json{{"seed_id", f.seed_id},
                {"failure_free", f.seed_failure_free},
                {"risky_points_used", f.risky_points_used},
                {"skipped_clips", f.skipped_clips},
                {"executions", f.executions},
                {"failures", f.failures()},
                {"failures_by_type", counts},
                {"failure_rate",
                 f.risky_points_used > 0
                     ? static_cast<double>(f.failures()) / f.risky_points_used
                     : 0.0},
                {"stuck", f.stuck},
                {"sim_seconds", f.sim_seconds}};
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

} // namespace

std::string risky_points_to_json(const std::string& scenario_id,
                                 const std::vector<RiskyPoint>& rps) {
    json arr = json::array();
    for (const auto& rp : rps) {
        arr.push_back(json{{"actor_id", rp.actor_id},
                           {"frame", rp.frame},
                           {"category", to_string(rp.category)},
                           {"actor_class", to_string(rp.actor_class)},
                           {"distance", rp.closest_distance},
                           {"rank", rp.score}});
    }
    json j{{"schema_version", 1}, {"scenario_id", scenario_id}, {"risky_points", arr}};
    return j.dump(2) + "\n";
}

std::vector<RiskyPoint> risky_points_from_json(const std::string& text) {
    std::vector<RiskyPoint> out;
    try {
        const json j = json::parse(text);
        for (const auto& r : j.at("risky_points")) {
            RiskyPoint rp;
            rp.actor_id = r.at("actor_id").get<std::string>();
            rp.frame = r.at("frame").get<long>();
            rp.category = category_from_string(r.at("category").get<std::string>());
            rp.actor_class = actor_class_from_string(r.at("actor_class").get<std::string>());
            rp.closest_distance = r.at("distance").get<double>();
            rp.score = r.at("rank").get<int>();
            out.push_back(std::move(rp));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("risky points JSON: ") + e.what());
    }
    return out;
}

std::string report_to_json(const CampaignReport& report, bool include_wall_clock) {
    const CampaignConfig& cfg = report.config;
    json j;
    j["schema_version"] = 1;
    j["config"] = json{{"strategy", to_string(cfg.strategy)},
                       {"o_b", cfg.o_b},
                       {"o_a", cfg.o_a},
                       {"n_rp", cfg.n_rp},
                       {"children", cfg.children},
                       {"repetitions", cfg.repetitions},
                       {"seed", cfg.seed},
                       {"th_vehicle", cfg.thresholds.th_vehicle},
                       {"th_pedestrian", cfg.thresholds.th_pedestrian},
                       {"critical_distance", cfg.critical_distance},
                       {"n_perturbations", cfg.n_perturbations},
                       {"speed_error_bound", cfg.speed_error_bound},
                       {"yaw_rate_error_bound", cfg.yaw_rate_error_bound},
                       {"steering_offset_mode", cfg.steering_offset_mode}};

    json reps = json::array();
    for (const auto& rr : report.repetitions) {
        json seeds = json::array();
        for (const auto& f : rr.fragments) {
            seeds.push_back(fragment_to_json(f));
        }
        json timeline = json::array();
        for (const auto& p : rr.timeline) {
            timeline.push_back(json::array({p.t, p.failures}));
        }
        json counts = json::object();
        const FailureCounts by_type = rr.failures_by_type();
        for (int i = 0; i < 5; ++i) {
            counts[to_string(static_cast<FailureType>(i))] = by_type[i];
        }
        json entry{{"repetition", rr.repetition},
                   {"risky_points_used", rr.risky_points_used()},
                   {"executions", rr.executions()},
                   {"failures", rr.failures()},
                   {"failures_by_type", counts},
                   {"stuck", rr.stuck()},
                   {"sim_seconds", rr.sim_seconds()},
                   {"auc", rr.auc},
                   {"seeds", seeds},
                   {"timeline", timeline}};
        if (include_wall_clock) {
            json wall_timeline = json::array();
            for (const auto& p : rr.wall_timeline) {
                wall_timeline.push_back(json::array({p.t, p.failures}));
            }
            entry["wall_timeline"] = wall_timeline;
            entry["wall_auc"] = rr.wall_auc;
        }
        reps.push_back(std::move(entry));
    }
    j["repetitions"] = reps;

    json agg_counts = json::object();
    for (int i = 0; i < 5; ++i) {
        agg_counts[to_string(static_cast<FailureType>(i))] =
            report.aggregate.failures_by_type[i];
    }
    j["aggregate"] = json{{"risky_points_used", report.aggregate.risky_points_used},
                          {"executions", report.aggregate.executions},
                          {"failures", report.aggregate.failures},
                          {"failures_by_type", agg_counts},
                          {"stuck", report.aggregate.stuck},
                          {"failure_rate", report.aggregate.failure_rate},
                          {"sim_seconds", report.aggregate.sim_seconds},
                          {"auc", report.aggregate.auc}};
    if (include_wall_clock) {
        j["wall_time"] = report.wall_time;
    }
    return j.dump(2) + "\n";
}

std::string executions_to_csv(const CampaignReport& report) {
    std::string out =
        "seed_id,strategy,repetition,rp_frame,child_idx,mutation_op,outcome,failure_type,"
        "sim_seconds\n";
    for (const auto& rr : report.repetitions) {
        for (const auto& f : rr.fragments) {
            for (const auto& rec : f.records) {
                out += rec.seed_id;
                out += ',';
                out += to_string(rec.strategy);
                out += ',';
                out += std::to_string(rec.repetition);
                out += ',';
                out += std::to_string(rec.rp_frame);
                out += ',';
                out += std::to_string(rec.child_index);
                out += ',';
                out += rec.mutation_op;
                out += ',';
                out += to_string(rec.outcome);
                out += ',';
                out += rec.failure_type ? to_string(*rec.failure_type) : "";
                out += ',';
                out += format_double(rec.sim_seconds);
                out += '\n';
            }
        }
    }
    return out;
}

std::string curve_to_csv(const CampaignReport& report) {
    std::string out = "repetition,sim_seconds,cumulative_failures\n";
    for (const auto& rr : report.repetitions) {
        for (const auto& p : rr.timeline) {
            out += std::to_string(rr.repetition);
            out += ',';
            out += format_double(p.t);
            out += ',';
            out += std::to_string(p.failures);
            out += '\n';
        }
    }
    return out;
}

std::string curve_to_svg(const CampaignReport& report) {
    constexpr double kW = 640.0;
    constexpr double kH = 400.0;
    constexpr double kMargin = 48.0;

    double max_t = 1.0;
    int max_f = 1;
    for (const auto& rr : report.repetitions) {
        for (const auto& p : rr.timeline) {
            max_t = std::max(max_t, p.t);
            max_f = std::max(max_f, p.failures);
        }
    }
    const auto sx = [&](double t) { return kMargin + (kW - 2 * kMargin) * t / max_t; };
    const auto sy = [&](double f) {
        return kH - kMargin - (kH - 2 * kMargin) * f / max_f;
    };

    static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b"};
    std::string svg;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
                  "viewBox=\"0 0 %g %g\">\n",
                  kW, kH, kW, kH);
    svg += buf;
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n",
                  kMargin, kH - kMargin, kW - kMargin, kH - kMargin);
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n",
                  kMargin, kMargin, kMargin, kH - kMargin);
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%g\" y=\"%g\" font-size=\"12\">simulated seconds (max %.0f)"
                  "</text>\n",
                  kW / 2 - 80.0, kH - 12.0, max_t);
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%g\" y=\"%g\" font-size=\"12\" transform=\"rotate(-90 14 %g)\">"
                  "cumulative failures (max %d)</text>\n",
                  14.0, kH / 2, kH / 2, max_f);
    svg += buf;

    for (const auto& rr : report.repetitions) {
        std::string path;
        double last_y = sy(0);
        for (std::size_t i = 0; i < rr.timeline.size(); ++i) {
            const auto& p = rr.timeline[i];
            const double x = sx(p.t);
            const double y = sy(p.failures);
            if (i == 0) {
                std::snprintf(buf, sizeof(buf), "M %.2f %.2f", x, y);
            } else {
                // Step curve: horizontal then vertical.
                std::snprintf(buf, sizeof(buf), " L %.2f %.2f L %.2f %.2f", x, last_y, x, y);
            }
            path += buf;
            last_y = y;
        }
        svg += "<path d=\"";
        svg += path;
        svg += "\" fill=\"none\" stroke=\"";
        svg += kColors[rr.repetition % (sizeof(kColors) / sizeof(kColors[0]))];
        svg += "\" stroke-width=\"1.5\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("cannot open for writing: " + path);
    }
    out << content;
}

} // namespace nearmiss
