#ifndef NEARMISS_ERRORS_HPP
#define NEARMISS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nearmiss {

// Base for all domain errors. `code` is a stable machine-readable tag that
// the CLI echoes in its error records.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const { return code_; }

private:
    std::string code_;
};

struct InvalidScenario : Error {
    explicit InvalidScenario(const std::string& msg) : Error("invalid_scenario", msg) {}
};

struct UnknownActor : Error {
    explicit UnknownActor(const std::string& msg) : Error("unknown_actor", msg) {}
};

struct NotFailureFree : Error {
    explicit NotFailureFree(const std::string& msg) : Error("not_failure_free", msg) {}
};

struct WindowDegenerate : Error {
    explicit WindowDegenerate(const std::string& msg) : Error("window_degenerate", msg) {}
};

struct NoValidEndWaypoint : Error {
    explicit NoValidEndWaypoint(const std::string& msg) : Error("no_valid_end_waypoint", msg) {}
};

struct NoRelevantNpc : Error {
    explicit NoRelevantNpc(const std::string& msg) : Error("no_relevant_npc", msg) {}
};

struct NoValidModel : Error {
    explicit NoValidModel(const std::string& msg) : Error("no_valid_model", msg) {}
};

struct TargetNotVehicle : Error {
    explicit TargetNotVehicle(const std::string& msg) : Error("target_not_vehicle", msg) {}
};

struct SeedNotFailureFree : Error {
    explicit SeedNotFailureFree(const std::string& msg) : Error("seed_not_failure_free", msg) {}
};

struct UnknownVariant : Error {
    explicit UnknownVariant(const std::string& msg) : Error("unknown_variant", msg) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& msg) : Error("parse_error", msg) {}
};

} // namespace nearmiss

#endif
