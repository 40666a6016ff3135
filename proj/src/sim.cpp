#include "nearmiss/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "nearmiss/errors.hpp"

namespace nearmiss {

namespace {

constexpr double kGoalRadius = 3.0;            // m to the end waypoint
constexpr double kGoalArcSlack = 3.0;          // m of remaining route
constexpr double kStuckSpeed = 0.1;            // m/s
constexpr double kStuckWindow = 10.0;          // s
constexpr double kTtcConeHalfAngle = 1.2;      // rad
constexpr double kTtcRange = 40.0;             // m
constexpr double kPedestrianTurnRate = 2.0 * std::numbers::pi; // rad/s

double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

// Target speed of the plan segment the actor currently sits on; past the
// final waypoint the plan is done and the actor stops.
double plan_speed_at(const NpcScript& npc, const Polyline& plan, double arc) {
    if (npc.plan.empty() || arc >= plan.length() - 1e-9) {
        return 0.0;
    }
    const std::size_t seg = plan.segment_at(arc);
    return npc.plan[std::min(seg, npc.plan.size() - 1)].target_speed;
}

// Pure-pursuit steering command toward a carrot point.
double pursuit_steer(const KinematicState& state, const ActorModel& model, Vec2 target) {
    const Vec2 rel = target - state.pose.position;
    const double dist = norm(rel);
    if (dist < 1e-6 || model.max_steer <= 0.0) {
        return 0.0;
    }
    const double bearing = wrap_angle(std::atan2(rel.y, rel.x) - state.pose.heading);
    const double wheel = std::atan2(2.0 * wheelbase(model) * std::sin(bearing), dist);
    return clamp_unit(-wheel / model.max_steer);
}

double speed_tracking_accel(double speed, double target, double gain) {
    return clamp_unit(gain * (target - speed));
}

struct Obstacle {
    OrientedBox box;
    Vec2 velocity;
};

// Constant-velocity joint projection; first projected overlap time within
// the horizon, if any.
std::optional<double> projected_collision_time(const OrientedBox& ego_box, Vec2 ego_vel,
                                               const Obstacle& obs, double horizon,
                                               double dt) {
    OrientedBox a = ego_box;
    OrientedBox b = obs.box;
    for (double t = dt; t <= horizon + 1e-12; t += dt) {
        a.center = ego_box.center + ego_vel * t;
        b.center = obs.box.center + obs.velocity * t;
        if (boxes_overlap(a, b)) {
            return t;
        }
    }
    return std::nullopt;
}

bool in_lookahead_cone(const KinematicState& ego, Vec2 point) {
    const Vec2 rel = point - ego.pose.position;
    const double range = norm(rel);
    if (range > kTtcRange) {
        return false;
    }
    if (range < 1e-9) {
        return true;
    }
    const double bearing = wrap_angle(std::atan2(rel.y, rel.x) - ego.pose.heading);
    return std::abs(bearing) <= kTtcConeHalfAngle;
}

OrientedBox standoff_corridor(const KinematicState& ego, const ActorModel& model,
                              double standoff) {
    const Vec2 fwd = heading_vec(ego.pose.heading);
    return {ego.pose.position + fwd * (model.length * 0.5 + standoff * 0.5),
            ego.pose.heading, standoff, model.width};
}

bool evaluate_braking(const WorldState& world) {
    const Scenario& sc = *world.scenario;
    const DriverParams& dp = sc.driver;
    const OrientedBox ego_box = footprint(sc.ego_model, world.ego.pose);
    const Vec2 ego_vel = heading_vec(world.ego.pose.heading) * world.ego.speed;
    const OrientedBox corridor =
        standoff_corridor(world.ego, sc.ego_model, dp.standoff_distance);

    const auto consider = [&](const Obstacle& obs) {
        if (boxes_overlap(corridor, obs.box)) {
            return true;
        }
        if (dp.ttc_brake_threshold <= 0.0 || !in_lookahead_cone(world.ego, obs.box.center)) {
            return false;
        }
        const auto ttc =
            projected_collision_time(ego_box, ego_vel, obs, dp.ttc_horizon, sc.dt());
        return ttc && *ttc < dp.ttc_brake_threshold;
    };

    for (const auto& npc : world.npcs) {
        if (!npc.active()) {
            continue;
        }
        const Obstacle obs{footprint(npc.script.actor, npc.state.pose),
                           heading_vec(npc.state.pose.heading) * npc.state.speed};
        if (consider(obs)) {
            return true;
        }
    }
    for (const auto& so : sc.map.static_obstacles) {
        if (consider({so.box, Vec2{}})) {
            return true;
        }
    }
    return false;
}

KinematicState step_vehicle(const KinematicState& state, const ActorModel& model,
                            ControlCommand cmd, double dt) {
    const double a = cmd.accel >= 0.0 ? cmd.accel * model.max_accel
                                      : cmd.accel * model.max_decel;
    KinematicState next = state;
    next.speed = std::clamp(state.speed + a * dt, 0.0, model.max_speed);
    next.yaw_rate = yaw_rate_from_steer(next.speed, clamp_unit(cmd.steer), model);
    next.pose = state.pose;
    advance_pose(next.pose.position, next.pose.heading, state.speed, next.speed,
                 next.yaw_rate, dt);
    return next;
}

// Point-mass pedestrian: turns toward the carrot at a bounded rate and moves
// along the new heading.
KinematicState step_pedestrian(const KinematicState& state, const ActorModel& model,
                               Vec2 target, double target_speed, double dt) {
    KinematicState next = state;
    const double tv = std::clamp(target_speed, 0.0, model.max_speed);
    const double a = std::clamp((tv - state.speed) / dt, -model.max_decel, model.max_accel);
    next.speed = std::clamp(state.speed + a * dt, 0.0, model.max_speed);

    double heading = state.pose.heading;
    const Vec2 rel = target - state.pose.position;
    if (norm(rel) > 1e-6 && next.speed > 0.0) {
        const double desired = std::atan2(rel.y, rel.x);
        const double delta = std::clamp(wrap_angle(desired - state.pose.heading),
                                        -kPedestrianTurnRate * dt, kPedestrianTurnRate * dt);
        heading = wrap_angle(state.pose.heading + delta);
    }
    next.yaw_rate = wrap_angle(heading - state.pose.heading) / dt;
    next.pose.heading = heading;
    next.pose.position =
        state.pose.position + heading_vec(heading) * (0.5 * (state.speed + next.speed) * dt);
    return next;
}

KinematicState step_npc(const NpcRuntime& npc, const Polyline& plan, double now, double dt) {
    const NpcScript& script = npc.script;
    const ActorModel& model = script.actor;

    if (now < script.trigger_time || script.plan.empty()) {
        // Holding: bleed speed to zero in place.
        if (model.actor_class == ActorClass::Pedestrian) {
            return step_pedestrian(npc.state, model, npc.state.pose.position, 0.0, dt);
        }
        return step_vehicle(npc.state, model,
                            {0.0, speed_tracking_accel(npc.state.speed, 0.0, 1.0)}, dt);
    }

    const double arc = plan.project(npc.state.pose.position);
    const double target_speed = plan_speed_at(script, plan, arc);

    if (model.actor_class == ActorClass::Pedestrian) {
        const Vec2 carrot = plan.sample(arc + std::max(0.5, npc.state.speed * 0.5));
        return step_pedestrian(npc.state, model, carrot, target_speed, dt);
    }

    const double lookahead = std::max(2.0, npc.state.speed * 0.6);
    const Vec2 carrot = plan.sample(arc + lookahead);
    ControlCommand cmd;
    const double plan_steer = pursuit_steer(npc.state, model, carrot);
    if (script.steering_override) {
        cmd.steer = script.steering_offset_mode
                        ? clamp_unit(plan_steer + *script.steering_override)
                        : clamp_unit(*script.steering_override);
    } else {
        cmd.steer = plan_steer;
    }
    cmd.accel = speed_tracking_accel(npc.state.speed, target_speed, 1.0);
    return step_vehicle(npc.state, model, cmd, dt);
}

std::shared_ptr<const SimCache> build_cache(const Scenario& scenario) {
    auto cache = std::make_shared<SimCache>();
    cache->route = Polyline(scenario.route_polyline());
    cache->plans.reserve(scenario.npcs.size());
    for (const auto& npc : scenario.npcs) {
        std::vector<Vec2> pts;
        pts.push_back(npc.spawn.pose.position);
        for (const auto& step : npc.plan) {
            pts.push_back(scenario.map.require_waypoint(step.waypoint_id).position);
        }
        cache->plans.emplace_back(std::move(pts));
    }
    return cache;
}

} // namespace

namespace {

// Shared by drive_ego and step so both produce identical commands; the brake
// decision is passed in because step also feeds it to the stuck timer.
ControlCommand ego_command(const WorldState& world, bool brake) {
    const Scenario& sc = *world.scenario;
    const DriverParams& dp = sc.driver;
    const Polyline& route = world.cache->route;

    const double arc = route.project(world.ego.pose.position);
    const double lookahead = std::max(dp.lookahead_min, world.ego.speed * dp.lookahead_gain);
    const Vec2 carrot = route.sample(arc + lookahead);

    ControlCommand cmd;
    cmd.steer = pursuit_steer(world.ego, sc.ego_model, carrot);
    cmd.accel = brake ? -1.0
                      : speed_tracking_accel(world.ego.speed, sc.route.target_speed,
                                             dp.speed_gain);
    return cmd;
}

} // namespace

WorldState make_world(const Scenario& scenario) {
    WorldState w;
    w.scenario = &scenario;
    w.cache = build_cache(scenario);
    w.tick = 0;
    w.ego = scenario.ego_spawn;
    w.ego.pose.heading = wrap_angle(w.ego.pose.heading);
    for (const auto& script : scenario.npcs) {
        NpcRuntime rt;
        rt.script = script;
        rt.state = script.spawn;
        rt.state.pose.heading = wrap_angle(rt.state.pose.heading);
        rt.spawned = script.spawn_time <= 0.0;
        w.npcs.push_back(std::move(rt));
    }
    return w;
}

ControlCommand drive_ego(const WorldState& world) {
    return ego_command(world, evaluate_braking(world));
}

bool stop_trigger_active(const WorldState& world) {
    return evaluate_braking(world);
}

std::optional<CollisionEvent> detect_collision(const WorldState& world) {
    const Scenario& sc = *world.scenario;
    const OrientedBox ego_box = footprint(sc.ego_model, world.ego.pose);

    for (const auto& so : sc.map.static_obstacles) {
        if (boxes_overlap(ego_box, so.box)) {
            return CollisionEvent{FailureType::F1, so.id};
        }
    }
    for (const auto& npc : world.npcs) {
        if (!npc.active()) {
            continue;
        }
        const OrientedBox other = footprint(npc.script.actor, npc.state.pose);
        if (!boxes_overlap(ego_box, other)) {
            continue;
        }
        if (npc.script.actor.actor_class == ActorClass::Pedestrian) {
            return CollisionEvent{FailureType::F2, npc.script.actor_id};
        }
        const Vec2 contact = closest_point_in_box(other, world.ego.pose.position);
        const Vec2 rel = contact - world.ego.pose.position;
        double bearing = 0.0;
        if (norm(rel) > 1e-9) {
            bearing = wrap_angle(std::atan2(rel.y, rel.x) - world.ego.pose.heading);
        }
        FailureType ft = FailureType::F4;
        if (std::abs(bearing) <= std::numbers::pi / 4.0) {
            ft = FailureType::F3;
        } else if (std::abs(bearing) >= 3.0 * std::numbers::pi / 4.0) {
            ft = FailureType::F5;
        }
        return CollisionEvent{ft, npc.script.actor_id};
    }
    return std::nullopt;
}

WorldState step(const WorldState& world, double dt) {
    const Scenario& sc = *world.scenario;
    WorldState next = world;
    const double now = world.time();
    const double t_next = now + dt;

    // Every control decision reads the same pre-step snapshot, so actor
    // update order cannot influence the result.
    const bool brake = evaluate_braking(world);
    next.ego = step_vehicle(world.ego, sc.ego_model, ego_command(world, brake), dt);

    for (std::size_t i = 0; i < world.npcs.size(); ++i) {
        const NpcRuntime& rt = world.npcs[i];
        NpcRuntime& out = next.npcs[i];
        if (!rt.spawned) {
            out.spawned = rt.script.spawn_time <= t_next + 1e-12;
            continue;
        }
        if (rt.despawned) {
            continue;
        }
        if (rt.script.despawn_time && *rt.script.despawn_time <= t_next + 1e-12) {
            out.despawned = true;
            continue;
        }
        out.state = step_npc(rt, world.cache->plans[i], now, dt);
    }

    if (world.ego.speed < kStuckSpeed && !brake) {
        next.unforced_standstill = world.unforced_standstill + dt;
    } else {
        next.unforced_standstill = 0.0;
    }
    next.tick = world.tick + 1;
    return next;
}

Trace run(const Scenario& scenario) {
    scenario.validate();
    const auto t_start = std::chrono::steady_clock::now();

    Trace trace;
    trace.scenario_id = scenario.scenario_id;
    trace.tick_rate = scenario.tick_rate;
    trace.ego_info = {scenario.ego_model.model_id, scenario.ego_model.actor_class,
                      scenario.ego_model.length, scenario.ego_model.width};
    for (const auto& npc : scenario.npcs) {
        trace.npc_info[npc.actor_id] = {npc.actor.model_id, npc.actor.actor_class,
                                        npc.actor.length, npc.actor.width};
    }

    const double dt = scenario.dt();
    const long max_ticks = static_cast<long>(std::ceil(scenario.duration_limit / dt));

    WorldState world = make_world(scenario);
    const Polyline& route = world.cache->route;

    const auto record = [&trace, dt](const WorldState& w) {
        TraceFrame frame;
        frame.tick = w.tick;
        frame.t = w.tick * dt;
        frame.ego = w.ego;
        for (const auto& npc : w.npcs) {
            if (npc.active()) {
                frame.npc_states.emplace(npc.script.actor_id, npc.state);
            }
        }
        trace.frames.push_back(std::move(frame));
    };

    const auto finish = [&](OutcomeKind kind, std::optional<CollisionEvent> ev) {
        trace.outcome.kind = kind;
        trace.outcome.frame = world.tick;
        if (ev) {
            trace.outcome.failure_type = ev->failure_type;
            trace.outcome.other_id = ev->other_id;
        }
        const auto t_end = std::chrono::steady_clock::now();
        trace.wall_time = std::chrono::duration<double>(t_end - t_start).count();
        return trace;
    };

    record(world);
    if (auto ev = detect_collision(world)) {
        return finish(OutcomeKind::Collision, ev);
    }

    while (world.tick < max_ticks) {
        world = step(world, dt);
        record(world);

        if (auto ev = detect_collision(world)) {
            return finish(OutcomeKind::Collision, ev);
        }
        const double arc = route.project(world.ego.pose.position);
        if (arc >= route.length() - kGoalArcSlack &&
            distance(world.ego.pose.position, route.points().back()) <= kGoalRadius) {
            return finish(OutcomeKind::Completed, std::nullopt);
        }
        if (world.unforced_standstill >= kStuckWindow) {
            return finish(OutcomeKind::Stuck, std::nullopt);
        }
    }
    return finish(OutcomeKind::Stuck, std::nullopt);
}

} // namespace nearmiss
