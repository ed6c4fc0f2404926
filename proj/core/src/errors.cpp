#include "rtovc/errors.hpp"

#include <string>

namespace rtovc {

const char* to_string(BarrierCause cause) noexcept {
    switch (cause) {
        case BarrierCause::None: return "none";
        case BarrierCause::TrackingError: return "tracking_error";
        case BarrierCause::TorqueBound: return "torque_bound";
        case BarrierCause::VelocityBound: return "velocity_bound";
    }
    return "unknown";
}

BarrierViolation::BarrierViolation(BarrierCause cause, double ratio)
    : std::runtime_error(std::string("barrier violation: ") + to_string(cause) + " at " +
                         std::to_string(ratio) + " of bound"),
      cause_(cause),
      ratio_(ratio) {}

PressureDomainViolation::PressureDomainViolation(double radicand)
    : std::runtime_error("valve radicand negative: " + std::to_string(radicand)),
      radicand_(radicand) {}

}  // namespace rtovc
