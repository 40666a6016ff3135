#include "nearmiss/mutator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nearmiss/errors.hpp"

namespace nearmiss {

namespace {

NpcScript* find_script(Scenario& s, const std::string& actor_id) {
    for (auto& npc : s.npcs) {
        if (npc.actor_id == actor_id) {
            return &npc;
        }
    }
    return nullptr;
}

bool is_vehicle_in(const Scenario& s, const std::string& actor_id) {
    const NpcScript* npc = s.find_npc(actor_id);
    return npc != nullptr && npc->actor.actor_class != ActorClass::Pedestrian;
}

} // namespace

const char* to_string(MutationOpKind k) {
    switch (k) {
    case MutationOpKind::ModelSwap: return "model_swap";
    case MutationOpKind::SteeringPerturb: return "steering_perturb";
    }
    return "model_swap";
}

std::string select_target(const ClippedScenario& clipped, MutationOpKind op) {
    if (clipped.relevant_npcs.empty()) {
        throw NoRelevantNpc("clip has no relevant NPCs: " + clipped.scenario.scenario_id);
    }
    const RelevantNpc* best = nullptr;
    if (op == MutationOpKind::ModelSwap) {
        for (const auto& rel : clipped.relevant_npcs) {
            if (best == nullptr || rel.min_window_distance < best->min_window_distance ||
                (rel.min_window_distance == best->min_window_distance &&
                 rel.actor_id < best->actor_id)) {
                best = &rel;
            }
        }
    } else {
        // Closest vehicle to the ego at the window start; NPCs that spawn
        // mid-window carry a negative sentinel and cannot be "closest".
        for (const auto& rel : clipped.relevant_npcs) {
            if (rel.start_distance < 0.0 || !is_vehicle_in(clipped.scenario, rel.actor_id)) {
                continue;
            }
            if (best == nullptr || rel.start_distance < best->start_distance ||
                (rel.start_distance == best->start_distance &&
                 rel.actor_id < best->actor_id)) {
                best = &rel;
            }
        }
        if (best == nullptr) {
            throw TargetNotVehicle("no relevant vehicle present at the window start");
        }
    }
    return best->actor_id;
}

std::pair<Scenario, MutationOp> swap_model(const ClippedScenario& clipped,
                                           const std::string& target, Rng& rng,
                                           const MutatorConfig& cfg) {
    const NpcScript* current = clipped.scenario.find_npc(target);
    if (current == nullptr) {
        throw NoRelevantNpc("swap target not in scenario: " + target);
    }
    const auto candidates = cfg.catalog->substitutes(current->actor);
    if (candidates.empty()) {
        throw NoValidModel("no substitute models for " + current->actor.model_id);
    }

    for (int attempt = 0; attempt <= cfg.max_swap_retries; ++attempt) {
        const ActorModel& pick = *candidates[rng.uniform_index(candidates.size())];
        Scenario child = clipped.scenario;
        NpcScript* npc = find_script(child, target);
        npc->actor = pick;
        npc->spawn.speed = std::min(npc->spawn.speed, pick.max_speed);
        for (auto& step : npc->plan) {
            step.target_speed = std::min(step.target_speed, pick.max_speed);
        }
        if (spawn_validity_check(child).empty()) {
            MutationOp op{MutationOpKind::ModelSwap, target, pick.model_id, 0.0};
            return {std::move(child), op};
        }
    }
    throw NoValidModel("no valid substitute fits the spawn gap for " + target);
}

std::pair<Scenario, MutationOp> perturb_steering(const ClippedScenario& clipped,
                                                 const std::string& target, Rng& rng,
                                                 const MutatorConfig& cfg) {
    if (!is_vehicle_in(clipped.scenario, target)) {
        throw TargetNotVehicle("steering target is not a vehicle: " + target);
    }
    Scenario child = clipped.scenario;
    NpcScript* npc = find_script(child, target);
    const double value = rng.uniform(-1.0, 1.0);
    npc->steering_override = value;
    npc->steering_offset_mode = cfg.steering_offset_mode;
    MutationOp op{MutationOpKind::SteeringPerturb, target, "", value};
    return {std::move(child), op};
}

MutationBatch generate_children(const ClippedScenario& clipped, int c, std::uint64_t seed,
                                const MutatorConfig& cfg) {
    MutationBatch batch;
    batch.parent_id = clipped.scenario.scenario_id;
    batch.seed = seed;

    // Operator availability decides the schedule up front.
    bool steering_available = true;
    try {
        select_target(clipped, MutationOpKind::SteeringPerturb);
    } catch (const TargetNotVehicle&) {
        steering_available = false;
    }
    const std::string swap_target = select_target(clipped, MutationOpKind::ModelSwap);

    for (int i = 0; i < c; ++i) {
        const std::uint64_t child_seed =
            derive_seed(seed, hash_str(clipped.scenario.scenario_id), static_cast<std::uint64_t>(i));
        Rng rng(child_seed);
        const bool want_swap = !steering_available || (i % 2 == 0);
        std::pair<Scenario, MutationOp> made{Scenario{}, MutationOp{}};
        if (want_swap) {
            try {
                made = swap_model(clipped, swap_target, rng, cfg);
            } catch (const NoValidModel&) {
                if (!steering_available) {
                    throw;
                }
                made = perturb_steering(
                    clipped, select_target(clipped, MutationOpKind::SteeringPerturb), rng, cfg);
            }
        } else {
            made = perturb_steering(
                clipped, select_target(clipped, MutationOpKind::SteeringPerturb), rng, cfg);
        }
        Scenario child = std::move(made.first);
        child.scenario_id = clipped.scenario.scenario_id + "#m" + std::to_string(i);
        MutationInfo info;
        info.parent_id = clipped.scenario.scenario_id;
        info.op = to_string(made.second.kind);
        info.actor_id = made.second.actor_id;
        info.new_model_id = made.second.new_model_id;
        info.steering_value = made.second.steering_value;
        info.seed = child_seed;
        info.child_index = i;
        child.mutation = std::move(info);
        batch.children.emplace_back(std::move(child), made.second);
    }
    return batch;
}

} // namespace nearmiss
