#pragma once

#include <stdexcept>
#include <string>

namespace hetsync {

// Invalid scenario or CLI configuration. `field` names the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what) : std::runtime_error(what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

// Malformed or inconsistent input data (CSV schema, ordering, missing columns).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An algorithm refused its input. flag() is a stable identifier such as
// "InsufficientExcitation" or "MatchGap".
class AlgorithmError : public std::runtime_error {
public:
    AlgorithmError(std::string flag, const std::string& what) : std::runtime_error(what), flag_(std::move(flag)) {}
    const std::string& flag() const { return flag_; }

private:
    std::string flag_;
};

} // namespace hetsync
