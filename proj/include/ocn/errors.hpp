#ifndef OCN_ERRORS_HPP
#define OCN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ocn {

// Invalid configuration value; message names the offending field.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dimension disagreement between inputs.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Channel matrix is numerically singular; callers may skip the realization.
struct SingularChannelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Problem size exceeds what an exhaustive method can enumerate.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Guard-length equation has no solution for the requested threshold.
struct NoSolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrainingDivergenceError : std::runtime_error {
    TrainingDivergenceError(const std::string& what, long iteration)
        : std::runtime_error(what), iteration(iteration) {}
    long iteration;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ocn

#endif  // OCN_ERRORS_HPP
