#pragma once

#include <stdexcept>
#include <string>

namespace bsheet {

/// Invalid grid, rule, or run configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain of a function (e.g. E1 at x <= 0).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Root bracket without a sign change.
class BracketError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Iterative method stopped before reaching its tolerance. Carries the best
/// estimate available at that point.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double best_estimate)
        : std::runtime_error(what), best_(best_estimate) {}

    double best_estimate() const noexcept { return best_; }

private:
    double best_;
};

}  // namespace bsheet
