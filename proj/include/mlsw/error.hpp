#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mlsw {

/// Operand has the wrong layer count for the requested operator.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Adaptive quadrature hit its subdivision limit.
class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid run configuration (exit code 2 at the CLI).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Total depth dropped below the non-cavitation floor.
class CavitationError : public std::runtime_error {
public:
    CavitationError(double t, std::size_t layer, std::size_t node, double depth, double floor)
        : std::runtime_error("cavitation guard tripped at t=" + std::to_string(t) + " (layer " +
                             std::to_string(layer + 1) + ", node " + std::to_string(node) +
                             ", depth " + std::to_string(depth) + " < " + std::to_string(floor) + ")"),
          time(t), layer(layer), node(node), depth(depth) {}

    double time;
    std::size_t layer;
    std::size_t node;
    double depth;
};

/// Non-finite value appeared in the state.
class BlowUpError : public std::runtime_error {
public:
    explicit BlowUpError(double t)
        : std::runtime_error("non-finite value in state at t=" + std::to_string(t)), time(t) {}

    double time;
};

} // namespace mlsw
