#pragma once

#include <stdexcept>
#include <string>

namespace hexapod {

/// Base class of every error raised by the control stack.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A leg endpoint outside the reachable workspace or outside actuator limits.
class ReachabilityError : public Error {
public:
    ReachabilityError(const std::string& what, std::string bound, double value, double limit)
        : Error(what), bound_(std::move(bound)), value_(value), limit_(limit) {}

    /// Name of the violated bound ("min_reach", "max_reach", "behind_coxa", "theta_limit", ...).
    const std::string& bound() const noexcept { return bound_; }
    double value() const noexcept { return value_; }
    double limit() const noexcept { return limit_; }

private:
    std::string bound_;
    double value_;
    double limit_;
};

class RankDeficiencyError : public Error {
public:
    RankDeficiencyError(const std::string& what, int rank, int required)
        : Error(what), rank_(rank), required_(required) {}

    int rank() const noexcept { return rank_; }
    int required() const noexcept { return required_; }

private:
    int rank_;
    int required_;
};

class OutOfBoundsError : public Error {
public:
    using Error::Error;
};

/// Config problems: either a parse error (with line) or a validation error (with field path).
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, std::string field, int line = 0)
        : Error(what), field_(std::move(field)), line_(line) {}

    const std::string& field() const noexcept { return field_; }
    int line() const noexcept { return line_; }

private:
    std::string field_;
    int line_;
};

}  // namespace hexapod
