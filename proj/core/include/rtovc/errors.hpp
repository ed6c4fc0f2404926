#pragma once

#include <stdexcept>
#include <string>

namespace rtovc {

enum class BarrierCause { None, TrackingError, TorqueBound, VelocityBound };

const char* to_string(BarrierCause cause) noexcept;

/// Thrown when a barrier argument reaches the guard fraction of its bound.
class BarrierViolation : public std::runtime_error {
public:
    BarrierViolation(BarrierCause cause, double ratio);
    BarrierCause cause() const noexcept { return cause_; }
    /// |x| / bound at the moment the guard fired.
    double ratio() const noexcept { return ratio_; }

private:
    BarrierCause cause_;
    double ratio_;
};

/// Valve radicand went negative; callers may clamp and continue.
class PressureDomainViolation : public std::runtime_error {
public:
    explicit PressureDomainViolation(double radicand);
    double radicand() const noexcept { return radicand_; }

private:
    double radicand_;
};

/// Non-finite plant state or derivative.
class PlantFault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotExponentiallyBounded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rtovc
