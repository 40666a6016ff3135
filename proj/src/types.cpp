#include "nearmiss/types.hpp"

#include "nearmiss/errors.hpp"

namespace nearmiss {

const char* to_string(ActorClass c) {
    switch (c) {
    case ActorClass::Car: return "car";
    case ActorClass::Bicycle: return "bicycle";
    case ActorClass::Pedestrian: return "pedestrian";
    }
    return "car";
}

ActorClass actor_class_from_string(const std::string& s) {
    if (s == "car") return ActorClass::Car;
    if (s == "bicycle") return ActorClass::Bicycle;
    if (s == "pedestrian") return ActorClass::Pedestrian;
    throw ParseError("unknown actor class: " + s);
}

const ModelCatalog& ModelCatalog::builtin() {
    static const ModelCatalog catalog = [] {
        ModelCatalog c;
        // Cars span a wide speed/size envelope so a swap meaningfully
        // changes arrival timing and occupied space.
        c.add({"car.hatchback", ActorClass::Car, 4.0, 1.80, 14.0, 2.6, 6.0, 0.55});
        c.add({"car.sedan", ActorClass::Car, 4.6, 1.85, 16.0, 2.8, 6.5, 0.55});
        c.add({"car.sport", ActorClass::Car, 4.4, 1.90, 25.0, 4.5, 8.0, 0.60});
        c.add({"car.suv", ActorClass::Car, 4.9, 2.00, 18.0, 2.4, 6.0, 0.50});
        c.add({"car.van", ActorClass::Car, 5.4, 2.05, 10.0, 1.8, 5.0, 0.45});
        c.add({"car.truck", ActorClass::Car, 7.2, 2.40, 8.5, 1.2, 4.5, 0.40});
        c.add({"bicycle.city", ActorClass::Bicycle, 1.8, 0.60, 6.0, 1.5, 3.0, 0.70});
        c.add({"bicycle.road", ActorClass::Bicycle, 1.8, 0.55, 10.0, 2.0, 3.5, 0.70});
        c.add({"bicycle.cargo", ActorClass::Bicycle, 2.5, 0.90, 4.0, 1.0, 2.5, 0.60});
        c.add({"pedestrian.walker", ActorClass::Pedestrian, 0.5, 0.50, 1.4, 1.0, 2.0, 0.0});
        c.add({"pedestrian.jogger", ActorClass::Pedestrian, 0.5, 0.50, 3.0, 1.5, 2.5, 0.0});
        c.add({"pedestrian.runner", ActorClass::Pedestrian, 0.5, 0.50, 5.0, 2.0, 3.0, 0.0});
        return c;
    }();
    return catalog;
}

const ActorModel* ModelCatalog::find(const std::string& model_id) const {
    for (const auto& m : models_) {
        if (m.model_id == model_id) {
            return &m;
        }
    }
    return nullptr;
}

const ActorModel& ModelCatalog::require(const std::string& model_id) const {
    const ActorModel* m = find(model_id);
    if (m == nullptr) {
        throw ParseError("unknown model id: " + model_id);
    }
    return *m;
}

std::vector<const ActorModel*> ModelCatalog::substitutes(const ActorModel& current) const {
    std::vector<const ActorModel*> out;
    const bool current_is_car = current.actor_class == ActorClass::Car;
    for (const auto& m : models_) {
        if (m.model_id == current.model_id) {
            continue;
        }
        const bool candidate_is_car = m.actor_class == ActorClass::Car;
        if (candidate_is_car == current_is_car) {
            out.push_back(&m);
        }
    }
    return out;
}

} // namespace nearmiss
