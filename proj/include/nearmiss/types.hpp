#ifndef NEARMISS_TYPES_HPP
#define NEARMISS_TYPES_HPP

#include <string>
#include <vector>

#include "nearmiss/geometry.hpp"

namespace nearmiss {

enum class ActorClass { Car, Bicycle, Pedestrian };

const char* to_string(ActorClass c);
ActorClass actor_class_from_string(const std::string& s);

struct Pose {
    Vec2 position;
    double heading = 0.0; // radians, [-pi, pi)
};

struct KinematicState {
    Pose pose;
    double speed = 0.0;    // m/s, >= 0
    double yaw_rate = 0.0; // rad/s
};

// Physical and kinematic envelope of one actor type. `max_steer` is the
// wheel angle reached by a steering command of +/-1.
struct ActorModel {
    std::string model_id;
    ActorClass actor_class = ActorClass::Car;
    double length = 0.0;    // m
    double width = 0.0;     // m
    double max_speed = 0.0; // m/s
    double max_accel = 0.0; // m/s^2
    double max_decel = 0.0; // m/s^2
    double max_steer = 0.0; // rad
};

inline double wheelbase(const ActorModel& m) { return 0.6 * m.length; }

inline OrientedBox footprint(const ActorModel& m, const Pose& pose) {
    return {pose.position, pose.heading, m.length, m.width};
}

// Fixed catalog of swappable actor models.
class ModelCatalog {
public:
    static const ModelCatalog& builtin();

    const std::vector<ActorModel>& models() const { return models_; }
    const ActorModel* find(const std::string& model_id) const;
    const ActorModel& require(const std::string& model_id) const;

    // Model-swap substitution domain: cars swap among cars; bicycles and
    // pedestrians swap within the combined bicycle+pedestrian pool.
    std::vector<const ActorModel*> substitutes(const ActorModel& current) const;

    void add(ActorModel m) { models_.push_back(std::move(m)); }

private:
    std::vector<ActorModel> models_;
};

} // namespace nearmiss

#endif
