#pragma once

// Finite discrete measured laminations: a finite set of pairwise
// non-crossing weighted geodesics. These are the exact stand-in for bounded
// measured laminations throughout the library; everything downstream
// (earthquakes, norms, experiments) consumes them.

#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "solquake/hyperbolic.hpp"

namespace solquake {

struct WeightedGeodesic {
    Geodesic geodesic;
    double weight;
};

struct MeasuredLamination {
    std::vector<WeightedGeodesic> atoms;

    bool empty() const { return atoms.empty(); }
    std::size_t size() const { return atoms.size(); }

    double total_mass() const {
        double s = 0.0;
        for (const auto& a : atoms) s += a.weight;
        return s;
    }
};

// First violated invariant, if any.
struct LaminationViolation {
    enum class Kind { crossing_pair, duplicate_geodesic, nonpositive_weight };
    Kind kind;
    std::size_t first = 0, second = 0; // offending atom indices

    std::string describe() const {
        std::ostringstream os;
        switch (kind) {
            case Kind::crossing_pair:
                os << "atoms " << first << " and " << second << " cross";
                break;
            case Kind::duplicate_geodesic:
                os << "atoms " << first << " and " << second << " share a geodesic";
                break;
            case Kind::nonpositive_weight:
                os << "atom " << first << " has nonpositive weight";
                break;
        }
        return os.str();
    }
};

inline std::optional<LaminationViolation> validate(const MeasuredLamination& lam) {
    for (std::size_t i = 0; i < lam.atoms.size(); ++i) {
        if (!(lam.atoms[i].weight > 0.0))
            return LaminationViolation{LaminationViolation::Kind::nonpositive_weight, i, i};
        for (std::size_t j = i + 1; j < lam.atoms.size(); ++j) {
            if (same_geodesic(lam.atoms[i].geodesic, lam.atoms[j].geodesic))
                return LaminationViolation{LaminationViolation::Kind::duplicate_geodesic, i, j};
            if (geodesics_cross(lam.atoms[i].geodesic, lam.atoms[j].geodesic))
                return LaminationViolation{LaminationViolation::Kind::crossing_pair, i, j};
        }
    }
    return std::nullopt;
}

inline MeasuredLamination make_lamination(std::vector<WeightedGeodesic> atoms) {
    MeasuredLamination lam{std::move(atoms)};
    if (auto v = validate(lam)) throw InvalidLamination("invalid lamination: " + v->describe());
    return lam;
}

// Total weight of atoms with one endpoint in (a,b) and the other in (c,d).
// Exact. Throws BoxCornerCollision if an atom endpoint coincides with a box
// corner within tol.
inline double box_mass(const MeasuredLamination& lam, const GeodesicBox& q,
                       double tol = exact_tol) {
    auto corners = q.corner_angles();
    double mass = 0.0;
    for (const auto& atom : lam.atoms) {
        for (double e : {atom.geodesic.p.angle, atom.geodesic.q.angle})
            for (double c : corners)
                if (angle_dist(e, c) <= tol)
                    throw BoxCornerCollision("box_mass: atom endpoint on a box corner");
        if (q.contains(atom.geodesic)) mass += atom.weight;
    }
    return mass;
}

inline MeasuredLamination pushforward(const MobiusMap& m, const MeasuredLamination& lam) {
    MeasuredLamination out;
    out.atoms.reserve(lam.atoms.size());
    for (const auto& atom : lam.atoms)
        out.atoms.push_back({Geodesic(m.apply(atom.geodesic.p), m.apply(atom.geodesic.q)),
                             atom.weight});
    return out;
}

inline MeasuredLamination scale_weights(const MeasuredLamination& lam, double t) {
    MeasuredLamination out;
    if (t == 0.0) return out;
    if (t < 0.0) throw DegenerateInput("scale_weights: negative scale");
    out.atoms = lam.atoms;
    for (auto& a : out.atoms) a.weight *= t;
    return out;
}

// A geodesic arc of hyperbolic length 1, stored by its two interior
// endpoints in the disk.
struct UnitArc {
    Complex from, to;
};

namespace detail {

// Unit-length arc centered at z0 in half-plane direction: maps the segment
// through i on the unit semicircle into place.
inline UnitArc unit_arc_through(Complex center_disk, double direction) {
    // In the half-plane, the arc through i perpendicular to (0,inf) is the
    // unit semicircle; hyperbolic arclength along it from angle pi/2 is
    // log tan(phi/2), so a centered unit arc spans tan(phi/2) = e^{+-1/2}.
    double phi1 = 2.0 * std::atan(std::exp(-0.5));
    double phi2 = 2.0 * std::atan(std::exp(0.5));
    Complex w1 = std::polar(1.0, phi1);
    Complex w2 = std::polar(1.0, phi2);
    // Rotate about i by "direction", then translate i to the target point.
    MobiusMap spin = MobiusMap::rotation(direction); // fixes i in half-plane
    Complex c = disk_to_half(center_disk);
    // Map i -> c: z -> x0 + y0 * z with c = x0 + i y0.
    MobiusMap move = MobiusMap::from_entries(c.imag(), c.real(), 0.0, 1.0);
    UnitArc arc;
    arc.from = half_to_disk(move.apply_half(spin.apply_half(w1)));
    arc.to = half_to_disk(move.apply_half(spin.apply_half(w2)));
    return arc;
}

// Point of g closest to the disk origin.
inline Complex midpoint_of(const Geodesic& g) {
    MobiusMap s = send_to_std(g.p, g.q);
    Complex w = s.apply_half(disk_to_half(Complex(0.0, 0.0)));
    // Closest point of (0,inf) to w is at height |w|.
    return half_to_disk(s.inverse().apply_half(Complex(0.0, std::abs(w))));
}

inline double arc_crossing_weight(const MeasuredLamination& lam, const UnitArc& arc) {
    double w = 0.0;
    for (const auto& atom : lam.atoms) {
        try {
            if (separates(atom.geodesic, arc.from, arc.to)) w += atom.weight;
        } catch (const PointOnGeodesic&) {
            // An arc endpoint on the atom: count as crossed (closed arcs).
            w += atom.weight;
        }
    }
    return w;
}

} // namespace detail

// Sampled lower bound for the Thurston norm sup_I mu(I) over unit-length
// geodesic arcs. Always evaluates one perpendicular arc through each atom's
// midpoint (so the result is >= the largest single weight); then, counted
// against `samples`, arcs along the common perpendicular of each atom pair
// (centered between and at the feet; these candidates are built from the
// pair geometry alone, so the estimate transforms with the lamination);
// then a seeded quasi-random family. Nondecreasing in `samples`.
inline double thurston_norm(const MeasuredLamination& lam, int samples,
                            std::uint64_t seed = 0) {
    if (lam.empty()) return 0.0;
    double best = 0.0;

    auto consider = [&](const UnitArc& arc) {
        best = std::max(best, detail::arc_crossing_weight(lam, arc));
    };

    // Unit arc along the geodesic |z| = r in standardized coordinates
    // (atom at (0, inf)), centered at arclength s from the top.
    auto perp_arc = [&](const MobiusMap& to_std, double r, double s_center) {
        MobiusMap inv = to_std.inverse();
        UnitArc arc;
        double phi_lo = 2.0 * std::atan(std::exp(s_center - 0.5));
        double phi_hi = 2.0 * std::atan(std::exp(s_center + 0.5));
        arc.from = half_to_disk(inv.apply_half(r * std::polar(1.0, phi_lo)));
        arc.to = half_to_disk(inv.apply_half(r * std::polar(1.0, phi_hi)));
        return arc;
    };

    std::vector<MobiusMap> to_std;
    to_std.reserve(lam.size());
    for (const auto& atom : lam.atoms)
        to_std.push_back(send_to_std(atom.geodesic.p, atom.geodesic.q));

    for (std::size_t i = 0; i < lam.size(); ++i) {
        Complex w = to_std[i].apply_half(disk_to_half(detail::midpoint_of(lam.atoms[i].geodesic)));
        consider(perp_arc(to_std[i], w.imag(), 0.0));
    }

    int used = 0;
    for (std::size_t i = 0; i < lam.size() && used < samples; ++i) {
        for (std::size_t j = 0; j < lam.size() && used < samples; ++j) {
            if (i == j) continue;
            // Standardize atom i to (0, inf); atom j becomes (u, v) on one
            // side. The common perpendicular is |z| = sqrt(uv), meeting atom
            // j where cos(phi) = sqrt(uv)/midpoint.
            double u = to_std[i].apply_half(lam.atoms[j].geodesic.p.half_plane());
            double v = to_std[i].apply_half(lam.atoms[j].geodesic.q.half_plane());
            if (!std::isfinite(u) || !std::isfinite(v)) continue;
            if (u * v <= 0.0) continue; // shared endpoint or crossing
            double r = std::sqrt(u * v);
            double m = (u + v) / 2.0;
            double cphi = std::clamp(r / m, -1.0, 1.0);
            double s_foot = std::log(std::tan(std::acos(cphi) / 2.0));
            for (double sc : {s_foot / 2.0, 0.0, s_foot}) {
                if (used >= samples) break;
                consider(perp_arc(to_std[i], r, sc));
                ++used;
            }
        }
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uangle(0.0, two_pi);
    std::uniform_real_distribution<double> uunit(0.0, 1.0);
    double rmax = 0.0;
    for (const auto& atom : lam.atoms)
        rmax = std::max(rmax, std::abs(detail::midpoint_of(atom.geodesic)));
    rmax = std::min(0.999, rmax + 0.3);
    while (used < samples) {
        double r = rmax * std::sqrt(uunit(rng));
        consider(detail::unit_arc_through(std::polar(r, uangle(rng)), uangle(rng)));
        ++used;
    }
    return best;
}

} // namespace solquake
