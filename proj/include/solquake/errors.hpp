#pragma once

#include <stdexcept>
#include <string>

namespace solquake {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Construction received geometrically degenerate data (coincident points,
// non-counterclockwise box corners, zero determinant, ...).
struct DegenerateInput : Error {
    using Error::Error;
};

// A map expected to be a hyperbolic translation is elliptic or parabolic.
struct NonHyperbolicMap : Error {
    using Error::Error;
};

// A query point lies on a geodesic; the caller must use a stratum-aware path.
struct PointOnGeodesic : Error {
    using Error::Error;
};

// A box corner coincides with an atom endpoint; perturb the box.
struct BoxCornerCollision : Error {
    using Error::Error;
};

// A box corner coincides with a breakpoint of a piecewise map.
struct BreakpointCollision : Error {
    using Error::Error;
};

// A piecewise circle map is not the boundary extension of an earthquake.
struct NonEarthquakeMap : Error {
    using Error::Error;
};

struct InvalidLamination : Error {
    using Error::Error;
};

// Truncated conjugate orbit contains a crossing pair.
struct CrossingOrbit : Error {
    std::string conjugator_a, conjugator_b;
    CrossingOrbit(const std::string& what, std::string wa, std::string wb)
        : Error(what), conjugator_a(std::move(wa)), conjugator_b(std::move(wb)) {}
};

// Coset selection constraints cannot be satisfied at the reported level.
struct SelectionUnsatisfiable : Error {
    int level;
    SelectionUnsatisfiable(const std::string& what, int lvl) : Error(what), level(lvl) {}
};

// Iteration failed to reach the requested residual.
struct NonConvergence : Error {
    double residual;
    NonConvergence(const std::string& what, double res) : Error(what), residual(res) {}
};

struct ConfigError : Error {
    using Error::Error;
};

// Invariant that must hold by construction was violated; indicates a bug.
struct InternalError : Error {
    using Error::Error;
};

} // namespace solquake
