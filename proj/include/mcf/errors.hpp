#pragma once

#include <stdexcept>
#include <string>

namespace mcf {

// Invalid or degenerate probability distribution (non-finite mean, var <= 0).
struct InvalidDistribution : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A scalar parameter outside its documented range (e.g. alpha not in [0,1]).
struct ParamError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Ensemble aggregation asked for fewer than two members.
struct InsufficientEnsemble : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Arena geometry cannot satisfy its own invariants (blocked regions, bad bounds).
struct ArenaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor shape disagreement in the neural substrate.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// API misuse (backward without forward cache, etc).
struct UsageError : std::logic_error {
    using std::logic_error::logic_error;
};

// Non-finite losses or gradients during training.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// No grid path between start and goal.
struct UnreachableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Metric requested over an empty episode set.
struct UndefinedMetric : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Bad run configuration: missing files, unknown keys, absent checkpoints.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mcf
