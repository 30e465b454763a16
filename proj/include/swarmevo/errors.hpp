#pragma once

#include <stdexcept>
#include <string>

namespace swarmevo {

/// Malformed or inconsistent configuration (bad polygon, bad file, bad flag value).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A trial or scenario could not be set up (e.g. infeasible robot placement).
class SetupError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A fitness function was asked to score a trace it is undefined for.
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller broke a documented precondition (arity mismatch, wrong command count).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Kriging/variogram fitting failed (too few samples, degenerate geometry).
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace swarmevo
