#pragma once

#include <stdexcept>
#include <string>

namespace pqr {

/// Bad arguments: malformed grids, probabilities outside (0,1), bad CSV cells.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Covariate data that cannot support a hull or pivot frame (e.g. all points identical).
class DegenerateData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// No feasible starting state could be built for a chain.
class InitializationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Internal consistency failure, e.g. an empty proposal interval for a feasible state.
class LogicError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Linear program without a finite optimum.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pqr
