#ifndef NEARMISS_MUTATOR_HPP
#define NEARMISS_MUTATOR_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "nearmiss/clipper.hpp"
#include "nearmiss/rng.hpp"
#include "nearmiss/scenario.hpp"

namespace nearmiss {

enum class MutationOpKind { ModelSwap, SteeringPerturb };

const char* to_string(MutationOpKind k);

struct MutationOp {
    MutationOpKind kind = MutationOpKind::ModelSwap;
    std::string actor_id;
    std::string new_model_id;    // ModelSwap
    double steering_value = 0.0; // SteeringPerturb, in [-1, 1]
};

struct MutationBatch {
    std::string parent_id;
    std::uint64_t seed = 0;
    std::vector<std::pair<Scenario, MutationOp>> children;
};

struct MutatorConfig {
    int max_swap_retries = 10;
    // Steering perturbation replaces the scripted steering by default; the
    // offset mode adds to it instead.
    bool steering_offset_mode = false;
    const ModelCatalog* catalog = &ModelCatalog::builtin();
};

// Mutation target per operator: ModelSwap picks the relevant NPC with the
// smallest windowed closest approach; SteeringPerturb picks the vehicle
// closest to the ego at the window start. Throws NoRelevantNpc, and
// TargetNotVehicle when no relevant vehicle exists for SteeringPerturb.
std::string select_target(const ClippedScenario& clipped, MutationOpKind op);

// Replace the target's model with a uniformly drawn substitute of the same
// car/non-car family; invalid spawns are resampled. Throws NoValidModel.
std::pair<Scenario, MutationOp> swap_model(const ClippedScenario& clipped,
                                           const std::string& target, Rng& rng,
                                           const MutatorConfig& cfg = {});

// Set the target's steering override to a uniform draw in [-1, 1]. Throws
// TargetNotVehicle for pedestrians.
std::pair<Scenario, MutationOp> perturb_steering(const ClippedScenario& clipped,
                                                 const std::string& target, Rng& rng,
                                                 const MutatorConfig& cfg = {});

// c children alternating ModelSwap (even index) and SteeringPerturb (odd),
// falling back to a single operator when the other is unavailable. Every
// child passes spawn_validity_check. Deterministic in (clipped, c, seed).
MutationBatch generate_children(const ClippedScenario& clipped, int c, std::uint64_t seed,
                                const MutatorConfig& cfg = {});

} // namespace nearmiss

#endif
