#include "nearmiss/forecaster.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "nearmiss/errors.hpp"
#include "nearmiss/rng.hpp"
#include "nearmiss/sim.hpp"

namespace nearmiss {

namespace {

constexpr double kGridCell = 8.0; // m, spatial hash cell for segment pruning

struct CellKey {
    int x;
    int y;
    bool operator==(const CellKey&) const = default;
};

struct CellHash {
    std::size_t operator()(const CellKey& k) const {
        return std::hash<long long>()((static_cast<long long>(k.x) << 32) ^
                                      static_cast<unsigned int>(k.y));
    }
};

struct SegmentGrid {
    const std::vector<Vec2>* pts = nullptr;
    std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> cells;

    explicit SegmentGrid(const std::vector<Vec2>& polyline) : pts(&polyline) {
        for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
            visit_cells(polyline[i], polyline[i + 1],
                        [this, i](CellKey key) { cells[key].push_back(i); });
        }
    }

    template <typename Fn>
    static void visit_cells(Vec2 a, Vec2 b, Fn&& fn) {
        const int x0 = static_cast<int>(std::floor(std::min(a.x, b.x) / kGridCell));
        const int x1 = static_cast<int>(std::floor(std::max(a.x, b.x) / kGridCell));
        const int y0 = static_cast<int>(std::floor(std::min(a.y, b.y) / kGridCell));
        const int y1 = static_cast<int>(std::floor(std::max(a.y, b.y) / kGridCell));
        for (int x = x0; x <= x1; ++x) {
            for (int y = y0; y <= y1; ++y) {
                fn(CellKey{x, y});
            }
        }
    }

    // Does segment (a, b) intersect any indexed segment?
    bool hits(Vec2 a, Vec2 b) const {
        bool found = false;
        visit_cells(a, b, [&](CellKey key) {
            if (found) {
                return;
            }
            const auto it = cells.find(key);
            if (it == cells.end()) {
                return;
            }
            for (const std::size_t i : it->second) {
                if (segments_intersect(a, b, (*pts)[i], (*pts)[i + 1])) {
                    found = true;
                    return;
                }
            }
        });
        return found;
    }
};

bool is_vehicle(ActorClass c) { return c != ActorClass::Pedestrian; }

} // namespace

const char* to_string(NpcCategory c) {
    switch (c) {
    case NpcCategory::Discarded: return "discarded";
    case NpcCategory::NonCritical: return "non_critical";
    case NpcCategory::NonCrossing: return "non_crossing";
    case NpcCategory::Crossing: return "crossing";
    case NpcCategory::Critical: return "critical";
    case NpcCategory::CriticalCrossing: return "critical_crossing";
    }
    return "discarded";
}

ProximityResult identify_proximity(const Trace& trace, double th_vehicle,
                                   double th_pedestrian) {
    if (trace.outcome.kind == OutcomeKind::Collision) {
        throw NotFailureFree("forecast requires a failure-free trace; this one collided");
    }
    ProximityResult out;
    for (const auto& [id, info] : trace.npc_info) {
        bool appears = false;
        for (const auto& frame : trace.frames) {
            if (frame.npc_states.count(id)) {
                appears = true;
                break;
            }
        }
        if (!appears) {
            out.discarded.insert(id);
            continue;
        }
        const ClosestApproach ca = closest_approach(trace, id);
        const double th = is_vehicle(info.actor_class) ? th_vehicle : th_pedestrian;
        if (ca.distance <= th) {
            out.close.push_back(ca);
        } else {
            out.discarded.insert(id);
        }
    }
    return out;
}

CrossingResult identify_crossing(const Trace& trace, const ProximityResult& close,
                                 double critical_distance) {
    CrossingResult out;
    const std::vector<Vec2> ego = ego_polyline(trace);
    const SegmentGrid grid(ego);

    for (const auto& ca : close.close) {
        const ActorPath path = actor_path(trace, ca.actor_id);
        bool crosses = false;
        for (std::size_t i = 0; i + 1 < path.positions.size() && !crosses; ++i) {
            // Only consecutive ticks form a movement segment.
            if (path.ticks[i + 1] != path.ticks[i] + 1) {
                continue;
            }
            crosses = grid.hits(path.positions[i], path.positions[i + 1]);
        }
        if (crosses) {
            out.crossing.insert(ca.actor_id);
            if (ca.distance <= critical_distance) {
                out.critical_crossing.insert(ca.actor_id);
            }
        } else {
            out.non_crossing.insert(ca.actor_id);
        }
    }
    return out;
}

std::vector<Vec2> perturb_ego_trajectory(const Trace& trace, const PerturbationConfig& cfg,
                                         int k) {
    const std::size_t n = trace.frames.size();
    std::vector<Vec2> out;
    out.reserve(n);
    if (n == 0) {
        return out;
    }

    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(k)));
    std::vector<double> speeds(n);
    std::vector<double> yaw_rates(n);
    double bias_v = 0.0;
    double bias_w = 0.0;
    if (cfg.bias_mode) {
        bias_v = rng.uniform(-cfg.speed_error_bound, cfg.speed_error_bound);
        bias_w = rng.uniform(-cfg.yaw_rate_error_bound, cfg.yaw_rate_error_bound);
    }
    for (std::size_t t = 0; t < n; ++t) {
        const double dv = cfg.bias_mode
                              ? bias_v
                              : rng.uniform(-cfg.speed_error_bound, cfg.speed_error_bound);
        const double dw = cfg.bias_mode
                              ? bias_w
                              : rng.uniform(-cfg.yaw_rate_error_bound, cfg.yaw_rate_error_bound);
        speeds[t] = std::max(0.0, trace.frames[t].ego.speed + dv);
        yaw_rates[t] = trace.frames[t].ego.yaw_rate + dw;
    }

    Vec2 pos = trace.frames[0].ego.pose.position;
    double heading = trace.frames[0].ego.pose.heading;
    const double dt = trace.dt();
    out.push_back(pos);
    for (std::size_t t = 1; t < n; ++t) {
        advance_pose(pos, heading, speeds[t - 1], speeds[t], yaw_rates[t], dt);
        out.push_back(pos);
    }
    return out;
}

CriticalityResult analyze_non_crossing(const Trace& trace,
                                       const std::set<std::string>& non_crossing,
                                       const PerturbationConfig& cfg) {
    CriticalityResult out;
    if (non_crossing.empty()) {
        return out;
    }

    std::set<std::string> remaining = non_crossing;
    for (int k = 0; k < cfg.n_perturbations && !remaining.empty(); ++k) {
        const std::vector<Vec2> traj = perturb_ego_trajectory(trace, cfg, k);
        for (auto it = remaining.begin(); it != remaining.end();) {
            bool critical = false;
            for (std::size_t t = 0; t < trace.frames.size() && !critical; ++t) {
                const auto state = trace.frames[t].npc_states.find(*it);
                if (state == trace.frames[t].npc_states.end()) {
                    continue;
                }
                critical =
                    distance(traj[t], state->second.pose.position) <= cfg.critical_distance;
            }
            if (critical) {
                out.critical.insert(*it);
                it = remaining.erase(it);
            } else {
                ++it;
            }
        }
    }
    out.non_critical = std::move(remaining);
    return out;
}

std::vector<RiskyPoint> rank(const Trace& trace, const ProximityResult& close,
                             const CrossingResult& crossing,
                             const CriticalityResult& criticality) {
    std::vector<RiskyPoint> out;
    for (const auto& ca : close.close) {
        NpcCategory category;
        if (crossing.critical_crossing.count(ca.actor_id)) {
            category = NpcCategory::CriticalCrossing;
        } else if (criticality.critical.count(ca.actor_id)) {
            category = NpcCategory::Critical;
        } else if (crossing.crossing.count(ca.actor_id)) {
            category = NpcCategory::Crossing;
        } else {
            continue; // non-critical NPCs yield no risky point
        }
        RiskyPoint rp;
        rp.actor_id = ca.actor_id;
        rp.frame = ca.frame;
        rp.category = category;
        rp.actor_class = trace.npc_info.at(ca.actor_id).actor_class;
        rp.closest_distance = ca.distance;
        out.push_back(rp);
    }

    const auto tier = [](NpcCategory c) {
        switch (c) {
        case NpcCategory::CriticalCrossing: return 0;
        case NpcCategory::Critical: return 1;
        default: return 2;
        }
    };
    std::sort(out.begin(), out.end(), [&](const RiskyPoint& a, const RiskyPoint& b) {
        if (tier(a.category) != tier(b.category)) {
            return tier(a.category) < tier(b.category);
        }
        const bool a_ped = a.actor_class == ActorClass::Pedestrian;
        const bool b_ped = b.actor_class == ActorClass::Pedestrian;
        if (a_ped != b_ped) {
            return a_ped;
        }
        if (a.closest_distance != b.closest_distance) {
            return a.closest_distance < b.closest_distance;
        }
        return a.actor_id < b.actor_id;
    });
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].score = static_cast<int>(i);
    }
    return out;
}

ForecastResult forecast(const Trace& trace, const ProximityThresholds& thresholds,
                        const PerturbationConfig& cfg) {
    ForecastResult result;
    const ProximityResult prox =
        identify_proximity(trace, thresholds.th_vehicle, thresholds.th_pedestrian);
    const CrossingResult crossing = identify_crossing(trace, prox, cfg.critical_distance);
    const CriticalityResult criticality =
        analyze_non_crossing(trace, crossing.non_crossing, cfg);
    result.risky_points = rank(trace, prox, crossing, criticality);

    for (const auto& id : prox.discarded) {
        result.categories[id] = NpcCategory::Discarded;
    }
    for (const auto& ca : prox.close) {
        const auto& id = ca.actor_id;
        if (crossing.critical_crossing.count(id)) {
            result.categories[id] = NpcCategory::CriticalCrossing;
        } else if (crossing.crossing.count(id)) {
            result.categories[id] = NpcCategory::Crossing;
        } else if (criticality.critical.count(id)) {
            result.categories[id] = NpcCategory::Critical;
        } else {
            result.categories[id] = NpcCategory::NonCritical;
        }
    }
    return result;
}

} // namespace nearmiss
