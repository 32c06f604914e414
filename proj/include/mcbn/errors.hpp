#pragma once

#include <stdexcept>
#include <string>

namespace mcbn {

// Shape / length mismatches between caller-supplied containers.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Numerical failure: non-convergence, NaN where finite values are required.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// API misuse, e.g. a backward call with a stale or foreign cache.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Training diverged; carries the epoch where the loss went non-finite.
class TrainingError : public std::runtime_error {
public:
    TrainingError(const std::string& what, std::size_t epoch)
        : std::runtime_error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
    std::size_t epoch() const { return epoch_; }

private:
    std::size_t epoch_;
};

}  // namespace mcbn
