#pragma once

#include <stdexcept>
#include <string>

namespace mems {

// Time stepper could not make progress even after halving dt to the floor.
struct StepFailure : std::runtime_error {
    explicit StepFailure(const std::string& what) : std::runtime_error(what) {}
};

// Newton (or a continuation step driving it) failed to converge.
struct NoConvergence : std::runtime_error {
    explicit NoConvergence(const std::string& what) : std::runtime_error(what) {}
};

// A bisection predicate never changed sign on the search interval.
struct BracketFailure : std::runtime_error {
    explicit BracketFailure(const std::string& what) : std::runtime_error(what) {}
};

// An iterative estimate failed its stability contract (e.g. extrapolated
// constants moving by more than the advertised tolerance).
struct ConvergenceFailure : std::runtime_error {
    explicit ConvergenceFailure(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mems
