#include "nearmiss/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <chrono>
#include <cmath>
#include <thread>

#include "nearmiss/clipper.hpp"
#include "nearmiss/errors.hpp"
#include "nearmiss/log.hpp"
#include "nearmiss/sim.hpp"

namespace nearmiss {

namespace {

struct ChildJob {
    std::size_t clip_index = 0;
    int child_index = 0;
    Scenario scenario;
    std::string mutation_op;
};

struct ChildResult {
    OutcomeKind outcome = OutcomeKind::Completed;
    std::optional<FailureType> failure_type;
    double sim_seconds = 0.0;
    double wall_seconds = 0.0;
};

// Run every job on a bounded worker pool; results land by index so the
// tallies are independent of scheduling. A failure inside a worker is
// captured and rethrown on the calling thread.
std::vector<ChildResult> run_jobs(const std::vector<ChildJob>& jobs, int jobs_n) {
    std::vector<ChildResult> results(jobs.size());
    if (jobs.empty()) {
        return results;
    }
    const int workers = std::max(1, std::min<int>(jobs_n, static_cast<int>(jobs.size())));
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    const auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) {
                return;
            }
            try {
                const Trace trace = run(jobs[i].scenario);
                results[i] = {trace.outcome.kind, trace.outcome.failure_type,
                              trace.duration(), trace.wall_time};
            } catch (...) {
                const std::scoped_lock lock(error_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
    return results;
}

// Risky frames per strategy, in execution order.
std::vector<long> select_risky_frames(const Scenario& seed_scenario, const Trace& trace,
                                      const CampaignConfig& cfg, std::uint64_t rep_seed) {
    std::vector<long> frames;
    switch (cfg.strategy) {
    case Strategy::Forecast: {
        const PerturbationConfig pcfg =
            cfg.perturbation(derive_seed(rep_seed, hash_str(trace.scenario_id), 0xF0u));
        const ForecastResult fc = forecast(trace, cfg.thresholds, pcfg);
        const std::size_t n = std::min<std::size_t>(cfg.n_rp, fc.risky_points.size());
        for (std::size_t i = 0; i < n; ++i) {
            frames.push_back(fc.risky_points[i].frame);
        }
        break;
    }
    case Strategy::Proximity: {
        // Close NPCs by order of first appearance, clipped at their closest
        // approach frames.
        const ProximityResult prox = identify_proximity(trace, cfg.thresholds.th_vehicle,
                                                        cfg.thresholds.th_pedestrian);
        struct Entry {
            long first_seen;
            std::string actor_id;
            long rp_frame;
        };
        std::vector<Entry> entries;
        for (const auto& ca : prox.close) {
            long first_seen = 0;
            for (const auto& frame : trace.frames) {
                if (frame.npc_states.count(ca.actor_id)) {
                    first_seen = frame.tick;
                    break;
                }
            }
            entries.push_back({first_seen, ca.actor_id, ca.frame});
        }
        std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
            if (a.first_seen != b.first_seen) {
                return a.first_seen < b.first_seen;
            }
            return a.actor_id < b.actor_id;
        });
        const std::size_t n = std::min<std::size_t>(cfg.n_rp, entries.size());
        for (std::size_t i = 0; i < n; ++i) {
            frames.push_back(entries[i].rp_frame);
        }
        break;
    }
    case Strategy::Random: {
        // Arrival frames of route waypoints, excluding the first o_b seconds.
        const Polyline line(seed_scenario.route_polyline());
        std::vector<long> eligible;
        for (const Vec2& wp : line.points()) {
            long best_frame = 0;
            double best = std::numeric_limits<double>::infinity();
            for (const auto& frame : trace.frames) {
                const double d = distance(frame.ego.pose.position, wp);
                if (d < best) {
                    best = d;
                    best_frame = frame.tick;
                }
            }
            if (best_frame >= std::lround(cfg.o_b * trace.tick_rate)) {
                eligible.push_back(best_frame);
            }
        }
        std::sort(eligible.begin(), eligible.end());
        eligible.erase(std::unique(eligible.begin(), eligible.end()), eligible.end());
        Rng rng(derive_seed(rep_seed, hash_str(trace.scenario_id), 0x5Au));
        const std::size_t n = std::min<std::size_t>(cfg.n_rp, eligible.size());
        for (std::size_t i = 0; i < n; ++i) {
            // Partial Fisher-Yates draw without replacement.
            const std::size_t j = i + rng.uniform_index(eligible.size() - i);
            std::swap(eligible[i], eligible[j]);
            frames.push_back(eligible[i]);
        }
        break;
    }
    case Strategy::Exhaustive: {
        const long last_s = static_cast<long>(std::floor(trace.duration()));
        for (long s = static_cast<long>(std::ceil(cfg.o_b)); s <= last_s - 1; ++s) {
            frames.push_back(std::lround(s * trace.tick_rate));
        }
        break;
    }
    }
    return frames;
}

} // namespace

const char* to_string(Strategy s) {
    switch (s) {
    case Strategy::Forecast: return "forecast";
    case Strategy::Random: return "random";
    case Strategy::Exhaustive: return "exhaustive";
    case Strategy::Proximity: return "proximity";
    }
    return "forecast";
}

Strategy strategy_from_string(const std::string& s) {
    if (s == "forecast") return Strategy::Forecast;
    if (s == "random") return Strategy::Random;
    if (s == "exhaustive") return Strategy::Exhaustive;
    if (s == "proximity") return Strategy::Proximity;
    throw ParseError("unknown strategy: " + s);
}

int SeedFragment::failures() const {
    int sum = 0;
    for (const int f : failures_by_type) {
        sum += f;
    }
    return sum;
}

int RepetitionReport::risky_points_used() const {
    int sum = 0;
    for (const auto& f : fragments) {
        sum += f.risky_points_used;
    }
    return sum;
}

int RepetitionReport::executions() const {
    int sum = 0;
    for (const auto& f : fragments) {
        sum += f.executions;
    }
    return sum;
}

FailureCounts RepetitionReport::failures_by_type() const {
    FailureCounts total{};
    for (const auto& f : fragments) {
        for (std::size_t i = 0; i < total.size(); ++i) {
            total[i] += f.failures_by_type[i];
        }
    }
    return total;
}

int RepetitionReport::failures() const {
    int sum = 0;
    for (const auto& f : fragments) {
        sum += f.failures();
    }
    return sum;
}

int RepetitionReport::stuck() const {
    int sum = 0;
    for (const auto& f : fragments) {
        sum += f.stuck;
    }
    return sum;
}

double RepetitionReport::sim_seconds() const {
    double sum = 0.0;
    for (const auto& f : fragments) {
        sum += f.sim_seconds;
    }
    return sum;
}

double compute_auc(const std::vector<TimelinePoint>& timeline) {
    if (timeline.empty()) {
        return 0.0;
    }
    double auc = 0.0;
    for (std::size_t i = 0; i + 1 < timeline.size(); ++i) {
        auc += timeline[i].failures * (timeline[i + 1].t - timeline[i].t);
    }
    return auc;
}

SeedFragment run_seed(const Scenario& seed_scenario, const CampaignConfig& cfg,
                      int repetition) {
    const std::uint64_t rep_seed = cfg.seed + static_cast<std::uint64_t>(repetition);

    SeedFragment fragment;
    fragment.seed_id = seed_scenario.scenario_id;

    const Trace trace = run(seed_scenario);
    if (trace.outcome.kind == OutcomeKind::Collision) {
        throw SeedNotFailureFree("seed scenario collides on its own: " +
                                 seed_scenario.scenario_id);
    }
    fragment.sim_seconds += trace.duration();
    fragment.wall_seconds += trace.wall_time;

    const std::vector<long> frames = select_risky_frames(seed_scenario, trace, cfg, rep_seed);

    std::vector<ChildJob> jobs;
    std::size_t clip_count = 0;
    for (const long frame : frames) {
        ClippedScenario clipped;
        try {
            clipped = clip_at_frame(seed_scenario, trace, frame, cfg.o_b, cfg.o_a,
                                    cfg.thresholds);
        } catch (const Error& e) {
            ++fragment.skipped_clips;
            NEARMISS_LOG_DEBUG("skipping clip at frame %ld of %s: %s", frame,
                               fragment.seed_id.c_str(), e.what());
            continue;
        }
        MutatorConfig mcfg;
        mcfg.steering_offset_mode = cfg.steering_offset_mode;
        MutationBatch batch;
        try {
            batch = generate_children(
                clipped, cfg.children,
                derive_seed(rep_seed, hash_str(fragment.seed_id), static_cast<std::uint64_t>(frame)),
                mcfg);
        } catch (const Error& e) {
            ++fragment.skipped_clips;
            NEARMISS_LOG_DEBUG("no children for clip at frame %ld of %s: %s", frame,
                               fragment.seed_id.c_str(), e.what());
            continue;
        }
        for (auto& [child, op] : batch.children) {
            ChildJob job;
            job.clip_index = clip_count;
            job.child_index = child.mutation->child_index;
            job.mutation_op = to_string(op.kind);
            job.scenario = std::move(child);
            jobs.push_back(std::move(job));
        }
        ++clip_count;
    }
    fragment.risky_points_used = static_cast<int>(clip_count);

    const std::vector<ChildResult> results = run_jobs(jobs, cfg.jobs);

    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const ChildJob& job = jobs[i];
        const ChildResult& res = results[i];
        ExecutionRecord rec;
        rec.seed_id = fragment.seed_id;
        rec.strategy = cfg.strategy;
        rec.repetition = repetition;
        rec.rp_frame = job.scenario.clip->window.rp_frame;
        rec.child_index = job.child_index;
        rec.mutation_op = job.mutation_op;
        rec.outcome = res.outcome;
        rec.failure_type = res.failure_type;
        rec.sim_seconds = res.sim_seconds;
        rec.wall_seconds = res.wall_seconds;

        ++fragment.executions;
        fragment.sim_seconds += res.sim_seconds;
        fragment.wall_seconds += res.wall_seconds;
        if (res.outcome == OutcomeKind::Collision && res.failure_type) {
            ++fragment.failures_by_type[static_cast<std::size_t>(*res.failure_type)];
        } else if (res.outcome == OutcomeKind::Stuck) {
            ++fragment.stuck;
        }
        fragment.records.push_back(std::move(rec));
    }
    return fragment;
}

CampaignReport run_campaign(const std::vector<Scenario>& seeds, const CampaignConfig& cfg) {
    const auto t_start = std::chrono::steady_clock::now();
    CampaignReport report;
    report.config = cfg;

    for (int rep = 0; rep < cfg.repetitions; ++rep) {
        RepetitionReport rr;
        rr.repetition = rep;
        double clock = 0.0;
        double wall_clock = 0.0;
        int failures = 0;
        rr.timeline.push_back({0.0, 0});
        rr.wall_timeline.push_back({0.0, 0});
        for (const auto& seed : seeds) {
            SeedFragment fragment;
            try {
                fragment = run_seed(seed, cfg, rep);
            } catch (const SeedNotFailureFree& e) {
                NEARMISS_LOG_WARN("%s", e.what());
                fragment.seed_id = seed.scenario_id;
                fragment.seed_failure_free = false;
                rr.fragments.push_back(std::move(fragment));
                continue;
            }
            // Rebuild both campaign clocks from the canonical record order.
            clock += fragment.sim_seconds;
            wall_clock += fragment.wall_seconds;
            double child_time = 0.0;
            double child_wall = 0.0;
            for (const auto& rec : fragment.records) {
                child_time += rec.sim_seconds;
                child_wall += rec.wall_seconds;
            }
            double t = clock - child_time; // seed run consumed first
            double wt = wall_clock - child_wall;
            for (const auto& rec : fragment.records) {
                t += rec.sim_seconds;
                wt += rec.wall_seconds;
                if (rec.outcome == OutcomeKind::Collision) {
                    ++failures;
                    rr.timeline.push_back({t, failures});
                    rr.wall_timeline.push_back({wt, failures});
                }
            }
            rr.fragments.push_back(std::move(fragment));
        }
        rr.timeline.push_back({clock, failures});
        rr.wall_timeline.push_back({wall_clock, failures});
        rr.auc = compute_auc(rr.timeline);
        rr.wall_auc = compute_auc(rr.wall_timeline);
        report.repetitions.push_back(std::move(rr));
    }

    report.aggregate = aggregate(report.repetitions);
    const auto t_end = std::chrono::steady_clock::now();
    report.wall_time = std::chrono::duration<double>(t_end - t_start).count();
    return report;
}

CampaignAggregate aggregate(const std::vector<RepetitionReport>& repetitions) {
    CampaignAggregate agg;
    if (repetitions.empty()) {
        return agg;
    }
    const double n = static_cast<double>(repetitions.size());
    for (const auto& rr : repetitions) {
        agg.risky_points_used += rr.risky_points_used();
        agg.executions += rr.executions();
        const FailureCounts counts = rr.failures_by_type();
        for (std::size_t i = 0; i < counts.size(); ++i) {
            agg.failures_by_type[i] += counts[i];
        }
        agg.failures += rr.failures();
        agg.stuck += rr.stuck();
        agg.sim_seconds += rr.sim_seconds();
        agg.auc += rr.auc;
    }
    agg.risky_points_used /= n;
    agg.executions /= n;
    for (auto& f : agg.failures_by_type) {
        f /= n;
    }
    agg.failures /= n;
    agg.stuck /= n;
    agg.sim_seconds /= n;
    agg.auc /= n;
    agg.failure_rate =
        agg.risky_points_used > 0.0 ? agg.failures / agg.risky_points_used : 0.0;
    return agg;
}

} // namespace nearmiss
