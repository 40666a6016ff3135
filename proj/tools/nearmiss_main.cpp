#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nearmiss/campaign.hpp"
#include "nearmiss/clipper.hpp"
#include "nearmiss/errors.hpp"
#include "nearmiss/forecaster.hpp"
#include "nearmiss/library.hpp"
#include "nearmiss/log.hpp"
#include "nearmiss/mutator.hpp"
#include "nearmiss/report_io.hpp"
#include "nearmiss/scenario_io.hpp"
#include "nearmiss/sim.hpp"
#include "nearmiss/trace_io.hpp"

namespace fs = std::filesystem;
using namespace nearmiss;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 2;
constexpr int kExitRuntimeError = 3;

void print_error_record(const std::string& code, const std::string& message) {
    nlohmann::json j{{"error", code}, {"message", message}};
    std::fprintf(stderr, "%s\n", j.dump().c_str());
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open file: " + path);
    }
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

Trace load_trace_pair(const std::string& csv_path, std::string sidecar) {
    if (sidecar.empty()) {
        sidecar = sidecar_path_for(csv_path);
    }
    return import_trace(csv_path, sidecar);
}

// Suite file: {"scenarios": ["relative/path.json", ...]}.
std::vector<Scenario> load_suite(const std::string& suite_path) {
    const fs::path base = fs::path(suite_path).parent_path();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(slurp(suite_path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("suite file: ") + e.what());
    }
    std::vector<Scenario> seeds;
    for (const auto& rel : j.at("scenarios")) {
        seeds.push_back(load_scenario((base / rel.get<std::string>()).string()));
    }
    if (seeds.empty()) {
        throw ParseError("suite file lists no scenarios");
    }
    return seeds;
}

struct CommonCampaignFlags {
    double o_b = 5.0;
    double o_a = 5.0;
    int n_rp = 4;
    int children = 10;
    int repetitions = 3;
    std::uint64_t seed = 1;
    int jobs = 0; // 0 = hardware parallelism
    double th_vehicle = 10.0;
    double th_pedestrian = 50.0;
    double critical_distance = 2.0;
    int n_perturbations = 20;
    double speed_error_bound = 0.5;
    double yaw_rate_error_bound = 0.02;
    bool steering_offset = false;
};

void add_threshold_flags(CLI::App* cmd, CommonCampaignFlags& f) {
    cmd->add_option("--th-vehicle", f.th_vehicle, "proximity radius for vehicles [m]");
    cmd->add_option("--th-pedestrian", f.th_pedestrian,
                    "proximity radius for pedestrians [m]");
    cmd->add_option("--critical-distance", f.critical_distance,
                    "criticality distance threshold [m]");
    cmd->add_option("--n-perturbations", f.n_perturbations,
                    "trajectory perturbations per NPC");
    cmd->add_option("--speed-error-bound", f.speed_error_bound,
                    "speed perturbation bound [m/s]");
    cmd->add_option("--yaw-rate-error-bound", f.yaw_rate_error_bound,
                    "yaw-rate perturbation bound [rad/s]");
}

CampaignConfig to_campaign_config(const CommonCampaignFlags& f, Strategy strategy) {
    CampaignConfig cfg;
    cfg.strategy = strategy;
    cfg.o_b = f.o_b;
    cfg.o_a = f.o_a;
    cfg.n_rp = f.n_rp;
    cfg.children = f.children;
    cfg.repetitions = f.repetitions;
    cfg.seed = f.seed;
    cfg.jobs = f.jobs > 0 ? f.jobs
                          : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    cfg.thresholds = {f.th_vehicle, f.th_pedestrian};
    cfg.critical_distance = f.critical_distance;
    cfg.n_perturbations = f.n_perturbations;
    cfg.speed_error_bound = f.speed_error_bound;
    cfg.yaw_rate_error_bound = f.yaw_rate_error_bound;
    cfg.steering_offset_mode = f.steering_offset;
    return cfg;
}

int cmd_scenario_list() {
    for (const auto& tmpl : default_templates()) {
        for (int v = 0; v < tmpl.variant_count; ++v) {
            std::printf("%s/v%d\n", to_string(tmpl.family), v);
        }
    }
    return kExitOk;
}

int cmd_scenario_emit(const std::string& name, const std::string& out,
                      std::uint64_t seed, double gap_scale, double forced_gap) {
    const auto slash = name.find("/v");
    if (slash == std::string::npos) {
        throw ParseError("scenario name must be family/v<index>: " + name);
    }
    ScenarioTemplate tmpl;
    tmpl.family = family_from_string(name.substr(0, slash));
    tmpl.seed = seed;
    tmpl.gap_scale = gap_scale;
    tmpl.forced_gap = forced_gap;
    const int variant = std::stoi(name.substr(slash + 2));
    const Scenario scenario = instantiate(tmpl, variant);
    save_scenario(scenario, out);
    std::printf("wrote %s\n", out.c_str());
    return kExitOk;
}

int cmd_suite(const std::string& out_dir, std::uint64_t seed) {
    const fs::path dir(out_dir);
    fs::create_directories(dir / "scenarios");
    nlohmann::json listing = nlohmann::json::array();
    for (const auto& base_tmpl : default_templates()) {
        ScenarioTemplate tmpl = base_tmpl;
        tmpl.seed = seed;
        for (int v = 0; v < tmpl.variant_count; ++v) {
            const Scenario scenario = instantiate(tmpl, v);
            std::string fname = scenario.scenario_id;
            for (auto& c : fname) {
                if (c == '/') {
                    c = '_';
                }
            }
            fname += ".json";
            save_scenario(scenario, (dir / "scenarios" / fname).string());
            listing.push_back("scenarios/" + fname);
        }
    }
    nlohmann::json suite{{"schema_version", 1}, {"scenarios", listing}};
    write_file((dir / "suite.json").string(), suite.dump(2) + "\n");
    std::printf("wrote %s (%zu scenarios)\n", (dir / "suite.json").c_str(), listing.size());
    return kExitOk;
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir,
            std::string name) {
    const Scenario scenario = load_scenario(scenario_path);
    const Trace trace = run(scenario);
    fs::create_directories(out_dir);
    if (name.empty()) {
        name = fs::path(scenario_path).stem().string();
    }
    const std::string csv = (fs::path(out_dir) / (name + ".csv")).string();
    export_trace(trace, csv, sidecar_path_for(csv));
    std::printf("%s: %s", scenario.scenario_id.c_str(), to_string(trace.outcome.kind));
    if (trace.outcome.failure_type) {
        std::printf(" (%s, %s at frame %ld)", to_string(*trace.outcome.failure_type),
                    trace.outcome.other_id->c_str(), trace.outcome.frame);
    }
    std::printf(", %.1f simulated seconds, %zu frames\n", trace.duration(),
                trace.frames.size());
    std::printf("wrote %s\n", csv.c_str());
    return kExitOk;
}

int cmd_forecast(const std::string& trace_path, const std::string& sidecar,
                 const std::string& out, const CommonCampaignFlags& f, bool bias_mode) {
    const Trace trace = load_trace_pair(trace_path, sidecar);
    PerturbationConfig pcfg;
    pcfg.n_perturbations = f.n_perturbations;
    pcfg.speed_error_bound = f.speed_error_bound;
    pcfg.yaw_rate_error_bound = f.yaw_rate_error_bound;
    pcfg.critical_distance = f.critical_distance;
    pcfg.seed = f.seed;
    pcfg.bias_mode = bias_mode;
    const ForecastResult result =
        forecast(trace, {f.th_vehicle, f.th_pedestrian}, pcfg);
    const std::string text = risky_points_to_json(trace.scenario_id, result.risky_points);
    if (out.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        write_file(out, text);
        std::printf("%zu risky points -> %s\n", result.risky_points.size(), out.c_str());
    }
    return kExitOk;
}

int cmd_clip(const std::string& scenario_path, const std::string& trace_path,
             const std::string& sidecar, const std::string& rp_path, int rp_index,
             double o_b, double o_a, const std::string& out) {
    const Scenario scenario = load_scenario(scenario_path);
    const Trace trace = load_trace_pair(trace_path, sidecar);
    const auto rps = risky_points_from_json(slurp(rp_path));
    if (rp_index < 0 || rp_index >= static_cast<int>(rps.size())) {
        throw ParseError("rp index out of range: " + std::to_string(rp_index));
    }
    const ClippedScenario clipped = clip(scenario, trace, rps[rp_index], o_b, o_a);
    save_scenario(clipped.scenario, out);
    std::printf("clip [%ld, %ld] around frame %ld with %zu relevant NPCs -> %s\n",
                clipped.window.start_frame, clipped.window.end_frame,
                clipped.window.rp_frame, clipped.relevant_npcs.size(), out.c_str());
    return kExitOk;
}

int cmd_fuzz(const std::string& clip_path, int children, std::uint64_t seed,
             const std::string& out_dir, bool steering_offset, int jobs) {
    const ClippedScenario clipped = clipped_from_scenario(load_scenario(clip_path));
    MutatorConfig mcfg;
    mcfg.steering_offset_mode = steering_offset;
    const MutationBatch batch = generate_children(clipped, children, seed, mcfg);

    fs::create_directories(out_dir);
    std::vector<Trace> traces(batch.children.size());
    const int workers = std::max(
        1, std::min<int>(jobs > 0 ? jobs : static_cast<int>(std::max(
                                               1u, std::thread::hardware_concurrency())),
                         static_cast<int>(batch.children.size())));
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= batch.children.size()) {
                return;
            }
            traces[i] = run(batch.children[i].first);
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }

    std::string csv = "child_idx,mutation_op,actor_id,detail,outcome,failure_type,"
                      "sim_seconds\n";
    int failures = 0;
    for (std::size_t i = 0; i < batch.children.size(); ++i) {
        const auto& [child, op] = batch.children[i];
        save_scenario(child,
                      (fs::path(out_dir) / ("child_" + std::to_string(i) + ".json")).string());
        const Trace& trace = traces[i];
        if (trace.outcome.kind == OutcomeKind::Collision) {
            ++failures;
        }
        char detail[64];
        if (op.kind == MutationOpKind::ModelSwap) {
            std::snprintf(detail, sizeof(detail), "%s", op.new_model_id.c_str());
        } else {
            std::snprintf(detail, sizeof(detail), "%.6f", op.steering_value);
        }
        csv += std::to_string(i) + ',' + to_string(op.kind) + ',' + op.actor_id + ',' +
               detail + ',' + to_string(trace.outcome.kind) + ',' +
               (trace.outcome.failure_type ? to_string(*trace.outcome.failure_type) : "") +
               ',' + std::to_string(trace.duration()) + '\n';
    }
    write_file((fs::path(out_dir) / "children.csv").string(), csv);
    std::printf("%zu children, %d collisions -> %s\n", batch.children.size(), failures,
                out_dir.c_str());
    return kExitOk;
}

int cmd_campaign(const std::string& suite_path, const std::string& strategy_name,
                 const CommonCampaignFlags& flags, const std::string& out_dir,
                 bool wall_clock) {
    const std::vector<Scenario> seeds = load_suite(suite_path);
    const CampaignConfig cfg = to_campaign_config(flags, strategy_from_string(strategy_name));
    NEARMISS_LOG_INFO("campaign: %zu seeds, strategy=%s, reps=%d, jobs=%d", seeds.size(),
                      to_string(cfg.strategy), cfg.repetitions, cfg.jobs);
    const CampaignReport report = run_campaign(seeds, cfg);

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    write_file((dir / "report.json").string(), report_to_json(report, wall_clock));
    write_file((dir / "executions.csv").string(), executions_to_csv(report));
    write_file((dir / "curve.csv").string(), curve_to_csv(report));
    write_file((dir / "curve.svg").string(), curve_to_svg(report));

    const auto& agg = report.aggregate;
    std::printf("strategy=%s seeds=%zu reps=%d\n", to_string(cfg.strategy), seeds.size(),
                cfg.repetitions);
    std::printf("mean risky points %.2f, executions %.2f, failures %.2f, stuck %.2f\n",
                agg.risky_points_used, agg.executions, agg.failures, agg.stuck);
    std::printf("failure rate %.4f C/RP, AUC %.1f failure-seconds, budget %.1f sim-s\n",
                agg.failure_rate, agg.auc, agg.sim_seconds);
    std::printf("wrote %s\n", (dir / "report.json").c_str());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic traffic simulation and near-miss focused fuzzing"};
    app.require_subcommand(1);

    // scenario
    auto* scenario_cmd = app.add_subcommand("scenario", "built-in scenario templates");
    scenario_cmd->require_subcommand(1);
    auto* list_cmd = scenario_cmd->add_subcommand("list", "list template variants");
    std::string emit_name;
    std::string emit_out = "scenario.json";
    std::uint64_t emit_seed = 1;
    double emit_gap_scale = 1.0;
    double emit_forced_gap = -1.0;
    auto* emit_cmd = scenario_cmd->add_subcommand("emit", "write one template variant");
    emit_cmd->add_option("name", emit_name, "family/v<index>")->required();
    emit_cmd->add_option("--out", emit_out, "output path");
    emit_cmd->add_option("--seed", emit_seed, "template seed");
    emit_cmd->add_option("--gap-scale", emit_gap_scale, "scale planted timing gaps");
    emit_cmd->add_option("--forced-gap", emit_forced_gap, "override every gap [s]");

    // suite
    std::string suite_out = "suite";
    std::uint64_t suite_seed = 1;
    auto* suite_cmd = app.add_subcommand("suite", "emit the planted scenario suite");
    suite_cmd->add_option("--out-dir", suite_out, "output directory");
    suite_cmd->add_option("--seed", suite_seed, "template seed");

    // run
    std::string run_scenario;
    std::string run_out = ".";
    std::string run_name;
    auto* run_cmd = app.add_subcommand("run", "simulate a scenario and record the trace");
    run_cmd->add_option("--scenario", run_scenario, "scenario file")->required();
    run_cmd->add_option("--out-dir", run_out, "output directory");
    run_cmd->add_option("--name", run_name, "output base name");

    // forecast
    std::string fc_trace;
    std::string fc_sidecar;
    std::string fc_out;
    bool fc_bias = false;
    CommonCampaignFlags fc_flags;
    auto* fc_cmd = app.add_subcommand("forecast", "rank risky points from a trace");
    fc_cmd->add_option("--trace", fc_trace, "trace csv")->required();
    fc_cmd->add_option("--sidecar", fc_sidecar, "trace sidecar (default: derived)");
    fc_cmd->add_option("--out", fc_out, "risky-point JSON output (default: stdout)");
    fc_cmd->add_option("--seed", fc_flags.seed, "perturbation seed");
    fc_cmd->add_flag("--bias-mode", fc_bias, "constant-offset perturbations");
    add_threshold_flags(fc_cmd, fc_flags);

    // clip
    std::string cl_scenario;
    std::string cl_trace;
    std::string cl_sidecar;
    std::string cl_rps;
    int cl_index = 0;
    double cl_ob = 5.0;
    double cl_oa = 5.0;
    std::string cl_out = "clip.json";
    auto* cl_cmd = app.add_subcommand("clip", "cut a sub-scenario around a risky point");
    cl_cmd->add_option("--scenario", cl_scenario, "parent scenario file")->required();
    cl_cmd->add_option("--trace", cl_trace, "parent trace csv")->required();
    cl_cmd->add_option("--sidecar", cl_sidecar, "trace sidecar (default: derived)");
    cl_cmd->add_option("--risky-points", cl_rps, "risky-point JSON")->required();
    cl_cmd->add_option("--rp-index", cl_index, "which risky point (rank order)");
    cl_cmd->add_option("--o-b", cl_ob, "seconds before the risky point");
    cl_cmd->add_option("--o-a", cl_oa, "seconds after the risky point");
    cl_cmd->add_option("--out", cl_out, "clip output path");

    // fuzz
    std::string fz_clip;
    int fz_children = 10;
    std::uint64_t fz_seed = 1;
    std::string fz_out = "fuzz";
    bool fz_offset = false;
    int fz_jobs = 0;
    auto* fz_cmd = app.add_subcommand("fuzz", "mutate a clip and execute the children");
    fz_cmd->add_option("--clip", fz_clip, "clipped scenario file")->required();
    fz_cmd->add_option("--children", fz_children, "children per clip");
    fz_cmd->add_option("--seed", fz_seed, "mutation seed");
    fz_cmd->add_option("--out-dir", fz_out, "output directory");
    fz_cmd->add_option("--jobs", fz_jobs, "worker threads");
    fz_cmd->add_flag("--steering-offset", fz_offset,
                     "add steering perturbations to plan steering");

    // campaign
    std::string cp_suite;
    std::string cp_strategy = "forecast";
    std::string cp_out = "campaign";
    bool cp_wall = false;
    CommonCampaignFlags cp_flags;
    auto* cp_cmd = app.add_subcommand("campaign", "run a fuzzing campaign over a suite");
    cp_cmd->add_option("--suite", cp_suite, "suite file")->required();
    cp_cmd->add_option("--strategy", cp_strategy,
                       "forecast | random | exhaustive | proximity");
    cp_cmd->add_option("--o-b", cp_flags.o_b, "seconds before each risky point");
    cp_cmd->add_option("--o-a", cp_flags.o_a, "seconds after each risky point");
    cp_cmd->add_option("--n-rp", cp_flags.n_rp, "risky points per seed");
    cp_cmd->add_option("--children", cp_flags.children, "children per clip");
    cp_cmd->add_option("--repetitions", cp_flags.repetitions, "campaign repetitions");
    cp_cmd->add_option("--seed", cp_flags.seed, "campaign seed");
    cp_cmd->add_option("--jobs", cp_flags.jobs, "worker threads (default: all cores)");
    cp_cmd->add_option("--out-dir", cp_out, "output directory");
    cp_cmd->add_flag("--steering-offset", cp_flags.steering_offset,
                     "add steering perturbations to plan steering");
    cp_cmd->add_flag("--wall-clock", cp_wall, "include wall-clock data in the report");
    add_threshold_flags(cp_cmd, cp_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e); // --help
        }
        print_error_record("cli_usage", e.what());
        return kExitInputError;
    }

    try {
        if (list_cmd->parsed()) {
            return cmd_scenario_list();
        }
        if (emit_cmd->parsed()) {
            return cmd_scenario_emit(emit_name, emit_out, emit_seed, emit_gap_scale,
                                     emit_forced_gap);
        }
        if (suite_cmd->parsed()) {
            return cmd_suite(suite_out, suite_seed);
        }
        if (run_cmd->parsed()) {
            return cmd_run(run_scenario, run_out, run_name);
        }
        if (fc_cmd->parsed()) {
            return cmd_forecast(fc_trace, fc_sidecar, fc_out, fc_flags, fc_bias);
        }
        if (cl_cmd->parsed()) {
            return cmd_clip(cl_scenario, cl_trace, cl_sidecar, cl_rps, cl_index, cl_ob,
                            cl_oa, cl_out);
        }
        if (fz_cmd->parsed()) {
            return cmd_fuzz(fz_clip, fz_children, fz_seed, fz_out, fz_offset, fz_jobs);
        }
        if (cp_cmd->parsed()) {
            return cmd_campaign(cp_suite, cp_strategy, cp_flags, cp_out, cp_wall);
        }
    } catch (const ParseError& e) {
        print_error_record(e.code(), e.what());
        return kExitInputError;
    } catch (const InvalidScenario& e) {
        print_error_record(e.code(), e.what());
        return kExitInputError;
    } catch (const UnknownVariant& e) {
        print_error_record(e.code(), e.what());
        return kExitInputError;
    } catch (const Error& e) {
        print_error_record(e.code(), e.what());
        return kExitRuntimeError;
    } catch (const std::exception& e) {
        print_error_record("internal", e.what());
        return kExitRuntimeError;
    }
    return kExitOk;
}
