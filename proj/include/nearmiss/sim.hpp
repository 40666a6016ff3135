#ifndef NEARMISS_SIM_HPP
#define NEARMISS_SIM_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nearmiss/scenario.hpp"
#include "nearmiss/trace.hpp"

namespace nearmiss {

// Shared pose integrator: trapezoidal in speed, explicit Euler in heading,
// with the position step taken along the pre-update heading. Trajectory
// re-integration from recorded (speed, yaw_rate) sequences uses this exact
// function, so a zero-error re-integration is bit-equal to the recording.
inline void advance_pose(Vec2& pos, double& heading, double v0, double v1, double w1,
                         double dt) {
    pos = pos + heading_vec(heading) * (0.5 * (v0 + v1) * dt);
    heading = wrap_angle(heading + w1 * dt);
}

// Steering command to yaw rate. Command sign: negative steers left (CCW).
inline double yaw_rate_from_steer(double speed, double steer_cmd, const ActorModel& model) {
    if (model.actor_class == ActorClass::Pedestrian) {
        return 0.0;
    }
    return -(speed / wheelbase(model)) * std::tan(steer_cmd * model.max_steer);
}

struct ControlCommand {
    double steer = 0.0; // [-1, 1], negative = left
    double accel = 0.0; // [-1, 1], negative scales max_decel
};

struct NpcRuntime {
    NpcScript script;
    KinematicState state;
    bool spawned = false;
    bool despawned = false;

    bool active() const { return spawned && !despawned; }
};

// Immutable per-scenario path data, shared by all copies of a world.
struct SimCache {
    Polyline route;
    std::vector<Polyline> plans; // parallel to Scenario::npcs
};

// Full mutable simulation state. Holds a pointer to the scenario, which must
// outlive the world.
struct WorldState {
    const Scenario* scenario = nullptr;
    std::shared_ptr<const SimCache> cache;
    long tick = 0;
    KinematicState ego;
    std::vector<NpcRuntime> npcs;
    double unforced_standstill = 0.0; // s of consecutive idle without a stop trigger

    double time() const { return tick * scenario->dt(); }
};

WorldState make_world(const Scenario& scenario);

// Rule-based ego controller: pure-pursuit steering along the route plus a
// longitudinal law that tracks the route speed and brakes hard when the
// predicted time-to-collision against anything in the look-ahead cone drops
// below the braking threshold (or when something sits dead ahead inside the
// standoff distance). Stateless and deterministic.
ControlCommand drive_ego(const WorldState& world);

// Whether some obstacle currently forces the ego to hold (TTC trigger or
// standoff hold). Used to gate the stuck timer.
bool stop_trigger_active(const WorldState& world);

struct CollisionEvent {
    FailureType failure_type;
    std::string other_id;
};

// Oriented-rectangle overlap between the ego footprint and every active
// actor and static obstacle. Static contact -> F1; pedestrian -> F2;
// vehicles by contact bearing in the ego frame: |b| <= 45 deg front -> F3,
// |b| >= 135 deg rear -> F5, else lateral -> F4.
std::optional<CollisionEvent> detect_collision(const WorldState& world);

// Advance every actor by one tick of dt = 1/tick_rate.
WorldState step(const WorldState& world, double dt);

// Run a scenario to termination and record the full trace. Deterministic:
// equal scenarios give bit-identical traces. Throws InvalidScenario.
Trace run(const Scenario& scenario);

} // namespace nearmiss

#endif
