#pragma once

#include <stdexcept>
#include <string>

namespace uqsurro {

// Error categories map to the CLI exit codes: ConfigError -> 2,
// DataError -> 3, TrainingDivergence -> 4.

// Invalid configuration: bad architecture, hyperparameters out of range,
// malformed or incomplete run configs.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad data: shape mismatches, parse failures, non-finite inputs,
// degenerate matrices, missing artifacts.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Training reached a non-finite loss. Carries the last epoch that still
// produced a finite value (-1 if the very first evaluation blew up).
class TrainingDivergence : public std::runtime_error {
public:
    TrainingDivergence(const std::string& msg, int last_finite_epoch)
        : std::runtime_error(msg), last_finite_epoch_(last_finite_epoch) {}

    int last_finite_epoch() const { return last_finite_epoch_; }

private:
    int last_finite_epoch_;
};

} // namespace uqsurro
