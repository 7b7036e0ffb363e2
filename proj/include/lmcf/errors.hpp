#pragma once

#include <stdexcept>
#include <string>

namespace lmcf {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A precondition on input values failed (wrong ranges, bad config).
struct DomainError : Error {
    using Error::Error;
};

// Curve with coincident neighbors or too few points.
struct MalformedCurveError : Error {
    using Error::Error;
};

// Explicit time step above the stability bound; carries the largest
// admissible step.
struct StabilityError : Error {
    StabilityError(double requested, double required)
        : Error("time step " + std::to_string(requested) +
                " above stability bound; required dt <= " + std::to_string(required)),
          requested_dt(requested), required_dt(required) {}
    double requested_dt;
    double required_dt;
};

// ODE state became non-finite.
struct IntegrationDivergedError : Error {
    using Error::Error;
};

// First fundamental form (near-)degenerate at a node.
struct SingularMetricError : Error {
    SingularMetricError(std::size_t iu, std::size_t iv, double det)
        : Error("singular metric at node (" + std::to_string(iu) + "," +
                std::to_string(iv) + "), det g = " + std::to_string(det)),
          node_u(iu), node_v(iv) {}
    std::size_t node_u;
    std::size_t node_v;
};

// Angle unwrap met a jump above the per-cell threshold.
struct UnwrapError : Error {
    using Error::Error;
};

// Projection onto the reference plane is degenerate.
struct NotGraphicalError : Error {
    using Error::Error;
};

// Open path given where a closed loop is required, or vice versa.
struct TopologyError : Error {
    using Error::Error;
};

// Preimage count is not constant over the sample points.
struct NotACoveringError : Error {
    using Error::Error;
};

// Cluster Gaussian density not within tolerance of an integer.
struct AmbiguousMultiplicityError : Error {
    using Error::Error;
};

}  // namespace lmcf
