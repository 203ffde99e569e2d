#pragma once

#include <stdexcept>
#include <string>

namespace apk {

/// Invalid run parameters (grid sizes, CFL, config keys).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Nodal data that violates a documented invariant (e.g. a custom equilibrium).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A non-finite value appeared in an intermediate computation.
class OverflowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Newton / root-finding failure. Carries the cell and time index when known.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, int cell = -1, int step = -1)
        : std::runtime_error(what), cell_(cell), step_(step) {}

    int cell() const { return cell_; }
    int step() const { return step_; }

private:
    int cell_;
    int step_;
};

/// Combination of options the solvers do not cover.
class UnsupportedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A runtime invariant check (maximum principle, conserved quantity) failed.
class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Output files or directories that cannot be written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The tracked front left the computational box.
class DomainExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace apk
