#pragma once

// Earthquake maps along finite measured laminations: interior evaluation,
// the exact piecewise-Mobius boundary extension, comparison isometries,
// measure recovery from a boundary map, three-point normalization,
// earthquake paths, and an iterative barycentric extension.
//
// Conventions. The base stratum is fixed pointwise. For an atom g with
// weight w, the fault translation is the hyperbolic translation along g of
// length w that moves the far side to the left as seen from the base side
// (S^1 carries the counterclockwise orientation). A stratum separated from
// the base by atoms g_1, ..., g_k (g_1 nearest) is moved by
// T_{g_1} o T_{g_2} o ... o T_{g_k}; this is the unique order for which the
// boundary extension is continuous.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "solquake/hyperbolic.hpp"
#include "solquake/lamination.hpp"

namespace solquake {

// An orientation-preserving circle homeomorphism given by finitely many
// Mobius pieces. Piece i applies on the counterclockwise arc from
// breakpoint i to breakpoint i+1 (cyclically); an empty map is the
// identity. Adjacent pieces agree at the shared breakpoint.
struct PiecewiseMobiusCircleMap {
    std::vector<double> breakpoints; // ascending angles in [0, 2pi)
    std::vector<MobiusMap> pieces;   // pieces.size() == breakpoints.size()

    std::size_t piece_count() const { return pieces.size(); }

    // Index of the piece whose arc contains the angle.
    std::size_t piece_index(double angle) const {
        angle = normalize_angle(angle);
        auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), angle);
        if (it == breakpoints.begin()) return breakpoints.size() - 1; // wrap
        return static_cast<std::size_t>(it - breakpoints.begin()) - 1;
    }

    const MobiusMap& piece_at(double angle) const {
        static const MobiusMap id;
        if (pieces.empty()) return id;
        return pieces[piece_index(angle)];
    }

    BoundaryPoint apply(BoundaryPoint p) const { return piece_at(p.angle).apply(p); }

    bool is_identity(double tol = exact_tol) const {
        for (const auto& m : pieces)
            if (!m.is_identity(tol)) return false;
        return true;
    }

    bool is_single_mobius(double tol = arith_tol) const {
        for (const auto& m : pieces)
            if (mobius_dist(m, pieces.front()) > tol) return false;
        return true;
    }

    PiecewiseMobiusCircleMap inverse() const {
        PiecewiseMobiusCircleMap inv;
        if (pieces.empty()) return inv;
        std::size_t n = pieces.size();
        std::vector<std::pair<double, MobiusMap>> arcs;
        arcs.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            // The two pieces adjacent to a breakpoint agree there; evaluate
            // the image through the better-conditioned one (heavy pieces
            // lose absolute accuracy near their own fixed points).
            const MobiusMap& before = pieces[(i + n - 1) % n];
            auto weight = [](const MobiusMap& m) {
                return std::max({std::fabs(m.a), std::fabs(m.b), std::fabs(m.c), std::fabs(m.d)});
            };
            const MobiusMap& eval = weight(before) < weight(pieces[i]) ? before : pieces[i];
            arcs.emplace_back(eval.apply(BoundaryPoint(breakpoints[i])).angle,
                              pieces[i].inverse());
        }
        std::sort(arcs.begin(), arcs.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });
        for (auto& [bp, m] : arcs) {
            inv.breakpoints.push_back(bp);
            inv.pieces.push_back(m);
        }
        return inv;
    }

    PiecewiseMobiusCircleMap post_compose(const MobiusMap& n) const {
        PiecewiseMobiusCircleMap out = *this;
        if (out.pieces.empty()) {
            if (!n.is_identity(0.0)) {
                out.breakpoints = {0.0};
                out.pieces = {n};
            }
            return out;
        }
        for (auto& m : out.pieces) m = n * m;
        return out;
    }

    PiecewiseMobiusCircleMap pre_compose(const MobiusMap& n) const {
        PiecewiseMobiusCircleMap out;
        if (pieces.empty()) {
            if (!n.is_identity(0.0)) {
                out.breakpoints = {0.0};
                out.pieces = {n};
            }
            return out;
        }
        MobiusMap ninv = n.inverse();
        std::vector<std::pair<double, MobiusMap>> arcs;
        arcs.reserve(pieces.size());
        for (std::size_t i = 0; i < pieces.size(); ++i)
            arcs.emplace_back(ninv.apply(BoundaryPoint(breakpoints[i])).angle, pieces[i] * n);
        std::sort(arcs.begin(), arcs.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });
        for (auto& [bp, m] : arcs) {
            out.breakpoints.push_back(bp);
            out.pieces.push_back(m);
        }
        return out;
    }
};

// g after f (i.e. x -> g(f(x))), with the refined breakpoint set.
inline PiecewiseMobiusCircleMap compose(const PiecewiseMobiusCircleMap& g,
                                        const PiecewiseMobiusCircleMap& f) {
    if (f.pieces.empty()) return g;
    if (g.pieces.empty()) return f;
    PiecewiseMobiusCircleMap finv = f.inverse();
    std::vector<double> bps = f.breakpoints;
    for (double gb : g.breakpoints) bps.push_back(finv.apply(BoundaryPoint(gb)).angle);
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end(),
                          [](double x, double y) { return angle_dist(x, y) <= 1e-14; }),
              bps.end());
    if (bps.size() > 1 && angle_dist(bps.front(), bps.back()) <= 1e-14) bps.pop_back();
    PiecewiseMobiusCircleMap out;
    out.breakpoints = bps;
    out.pieces.reserve(bps.size());
    for (std::size_t i = 0; i < bps.size(); ++i) {
        double next = bps[(i + 1) % bps.size()];
        double len = ccw_from(bps[i], next);
        if (len == 0.0) len = two_pi;
        double mid = normalize_angle(bps[i] + len / 2.0);
        const MobiusMap& fp = f.piece_at(mid);
        out.pieces.push_back(g.piece_at(fp.apply(BoundaryPoint(mid)).angle) * fp);
    }
    return out;
}

struct MapValidation {
    bool continuous = true;
    bool monotone = true;
    double worst_jump = 0.0; // largest breakpoint mismatch, as an angle

    bool ok() const { return continuous && monotone; }
};

// Checks the circle-homeomorphism invariants: adjacent pieces agree at the
// shared breakpoint and image breakpoints stay in counterclockwise order.
inline MapValidation check_map(const PiecewiseMobiusCircleMap& h, double tol = arith_tol) {
    MapValidation v;
    std::size_t n = h.pieces.size();
    if (n <= 1) return v;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = (i + 1) % n;
        BoundaryPoint bp(h.breakpoints[j]);
        double jump = angle_dist(h.pieces[i].apply(bp).angle, h.pieces[j].apply(bp).angle);
        v.worst_jump = std::max(v.worst_jump, jump);
        if (jump > tol) v.continuous = false;
    }
    // Image breakpoints must keep the cyclic order (each Mobius piece is
    // itself increasing, so this implies global monotonicity).
    double base = h.pieces[0].apply(BoundaryPoint(h.breakpoints[0])).angle;
    double prev = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        double rel = ccw_from(base, h.pieces[i].apply(BoundaryPoint(h.breakpoints[i])).angle);
        if (rel + tol < prev) v.monotone = false;
        prev = std::max(prev, rel);
    }
    return v;
}

// An earthquake of the disk along a finite measured lamination, with the
// stratum of base_point fixed.
struct EarthquakeMap {
    enum class Convention { left, right };
    enum class FaultSide { far_side, near_side };

    MeasuredLamination lamination;
    Complex base_point{0.0, 0.0};
    Convention convention = Convention::left;
    // Which stratum isometry applies on a fault geodesic itself; the
    // boundary extension does not depend on it.
    FaultSide fault_side = FaultSide::far_side;

    EarthquakeMap() = default;
    EarthquakeMap(MeasuredLamination lam, Complex base,
                  Convention conv = Convention::left, FaultSide fs = FaultSide::far_side)
        : lamination(std::move(lam)), base_point(base), convention(conv), fault_side(fs) {
        if (auto v = validate(lamination))
            throw InvalidLamination("EarthquakeMap: " + v->describe());
        for (const auto& atom : lamination.atoms)
            if (std::fabs(signed_side(atom.geodesic.p, atom.geodesic.q, base_point)) <= exact_tol)
                throw PointOnGeodesic("EarthquakeMap: base point lies on a fault geodesic");
    }
};

namespace detail {

struct FaultData {
    Geodesic geodesic;
    double weight;
    MobiusMap translation; // leftward as seen from the base side
    double far_start = 0.0, far_len = 0.0; // far-side boundary arc
};

inline std::vector<FaultData> fault_data(const EarthquakeMap& eq) {
    std::vector<FaultData> faults;
    faults.reserve(eq.lamination.size());
    for (const auto& atom : eq.lamination.atoms) {
        FaultData f{atom.geodesic, atom.weight, MobiusMap::identity()};
        // Orient the axis so the base side lies on its left; a positive
        // translation toward the head is then a left earthquake as seen
        // from the base.
        BoundaryPoint tail = atom.geodesic.p, head = atom.geodesic.q;
        if (signed_side(tail, head, eq.base_point) > 0.0) std::swap(tail, head);
        double w = eq.convention == EarthquakeMap::Convention::left ? atom.weight : -atom.weight;
        f.translation = translation_along_oriented(tail, head, w);
        // Far-side boundary arc: the arc from tail to head counterclockwise
        // is the boundary of the right side of (tail -> head)... the left
        // side of the oriented axis is bounded by the arc head -> tail, so
        // the far (non-base) side is bounded by tail -> head.
        f.far_start = tail.angle;
        f.far_len = ccw_from(tail.angle, head.angle);
        faults.push_back(f);
    }
    return faults;
}

inline bool far_contains(const FaultData& f, double angle) {
    double rel = ccw_from(f.far_start, angle);
    return rel > 0.0 && rel < f.far_len;
}

// Composition for the stratum whose boundary contains `angle`, built
// base-outward (nearest fault applied last as a matrix product).
inline MobiusMap stratum_map_at_angle(const std::vector<FaultData>& faults, double angle) {
    std::vector<const FaultData*> separating;
    for (const auto& f : faults)
        if (far_contains(f, angle)) separating.push_back(&f);
    std::sort(separating.begin(), separating.end(),
              [](const FaultData* x, const FaultData* y) { return x->far_len > y->far_len; });
    MobiusMap m;
    for (const FaultData* f : separating) m = m * f->translation;
    return m;
}

} // namespace detail

// Isometry applied by the earthquake to the stratum containing z. Throws
// PointOnGeodesic if z lies on a fault (use fault_isometry for faults).
inline MobiusMap stratum_isometry(const EarthquakeMap& eq, Complex z) {
    auto faults = detail::fault_data(eq);
    std::vector<std::pair<double, const detail::FaultData*>> separating;
    for (const auto& f : faults) {
        double side = signed_side(f.geodesic.p, f.geodesic.q, z);
        if (std::fabs(side) <= exact_tol)
            throw PointOnGeodesic(
                "earthquake_eval: point lies on a fault geodesic; evaluate via fault_isometry "
                "with the fault_side convention");
        double base_side = signed_side(f.geodesic.p, f.geodesic.q, eq.base_point);
        if ((side < 0.0) != (base_side < 0.0)) separating.emplace_back(f.far_len, &f);
    }
    std::sort(separating.begin(), separating.end(),
              [](const auto& x, const auto& y) { return x.first > y.first; });
    MobiusMap m;
    for (const auto& [len, f] : separating) m = m * f->translation;
    return m;
}

// Isometry applied to the fault stratum of the given atom, following the
// earthquake's fault_side convention.
inline MobiusMap fault_isometry(const EarthquakeMap& eq, std::size_t atom_index) {
    auto faults = detail::fault_data(eq);
    const auto& self = faults.at(atom_index);
    // Strata on the near side of this fault: faults separating the base
    // from it are exactly those whose far side contains this fault's arc.
    double probe = normalize_angle(self.far_start + self.far_len / 2.0);
    std::vector<std::pair<double, const detail::FaultData*>> separating;
    for (std::size_t i = 0; i < faults.size(); ++i) {
        if (i == atom_index) continue;
        if (detail::far_contains(faults[i], probe) &&
            detail::far_contains(faults[i], self.far_start))
            separating.emplace_back(faults[i].far_len, &faults[i]);
    }
    std::sort(separating.begin(), separating.end(),
              [](const auto& x, const auto& y) { return x.first > y.first; });
    MobiusMap m;
    for (const auto& [len, f] : separating) m = m * f->translation;
    if (eq.fault_side == EarthquakeMap::FaultSide::far_side) m = m * self.translation;
    return m;
}

inline Complex earthquake_eval(const EarthquakeMap& eq, Complex z) {
    return stratum_isometry(eq, z).apply_disk(z);
}

// M_q o M_p^{-1} for the strata containing p and q.
inline MobiusMap comparison_isometry(const EarthquakeMap& eq, Complex p, Complex q) {
    return stratum_isometry(eq, q) * stratum_isometry(eq, p).inverse();
}

// Exact boundary extension of the earthquake: breakpoints at the atom
// endpoints, the comparison isometry of each gap on the arc between them.
inline PiecewiseMobiusCircleMap earthquake_boundary(const EarthquakeMap& eq) {
    PiecewiseMobiusCircleMap h;
    if (eq.lamination.empty()) return h;
    auto faults = detail::fault_data(eq);

    std::vector<double> bps;
    bps.reserve(2 * faults.size());
    for (const auto& f : faults) {
        bps.push_back(f.geodesic.p.angle);
        bps.push_back(f.geodesic.q.angle);
    }
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end(),
                          [](double x, double y) { return angle_dist(x, y) <= 1e-14; }),
              bps.end());
    if (bps.size() > 1 && angle_dist(bps.front(), bps.back()) <= 1e-14) bps.pop_back();

    h.breakpoints = bps;
    h.pieces.reserve(bps.size());
    for (std::size_t i = 0; i < bps.size(); ++i) {
        double next = bps[(i + 1) % bps.size()];
        double len = ccw_from(bps[i], next);
        if (len == 0.0) len = two_pi;
        double mid = normalize_angle(bps[i] + len / 2.0);
        h.pieces.push_back(detail::stratum_map_at_angle(faults, mid));
    }

    // Bug trap: the construction is algebraically continuous and monotone;
    // verify within the rounding headroom of the piece entries (evaluation
    // error grows with the matrix norms for heavy laminations).
    double scale = 1.0;
    for (const auto& m : h.pieces)
        scale = std::max({scale, std::fabs(m.a), std::fabs(m.b), std::fabs(m.c), std::fabs(m.d)});
    MapValidation v = check_map(h, arith_tol * scale * scale);
    if (!v.ok())
        throw InternalError("earthquake_boundary: extension violates continuity/monotonicity");
    return h;
}

// Recovered fault measure of a piecewise-Mobius circle map: at each
// breakpoint the transition between adjacent pieces, read in source
// coordinates as M_i^{-1} o M_{i+1}, is a hyperbolic translation along an
// atom through that breakpoint; its axis and translation length give the
// atom and its weight (each atom appears at both of its endpoints and is
// merged). Throws NonEarthquakeMap on elliptic or parabolic transitions.
inline MeasuredLamination recover_measure(const PiecewiseMobiusCircleMap& h,
                                          double identity_tol = 1e-11,
                                          double merge_tol = 1e-6) {
    MeasuredLamination out;
    std::size_t n = h.pieces.size();
    if (n <= 1) return out;
    std::vector<WeightedGeodesic> candidates;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = (i + 1) % n;
        MobiusMap c = h.pieces[i].inverse() * h.pieces[j];
        if (c.is_identity(identity_tol)) continue;
        if (std::fabs(c.trace()) <= 2.0)
            throw NonEarthquakeMap("recover_measure: non-hyperbolic piece transition");
        AxisEndpoints ax = hyperbolic_axis(c);
        candidates.push_back({Geodesic(ax.repelling, ax.attracting), translation_length(c)});
    }
    std::vector<bool> used(candidates.size(), false);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (used[i]) continue;
        double weight = candidates[i].weight;
        int merged = 1;
        for (std::size_t j = i + 1; j < candidates.size(); ++j) {
            if (used[j]) continue;
            if (same_geodesic(candidates[i].geodesic, candidates[j].geodesic, merge_tol) &&
                std::fabs(candidates[i].weight - candidates[j].weight) <= merge_tol) {
                used[j] = true;
                weight += candidates[j].weight;
                ++merged;
            }
        }
        out.atoms.push_back({candidates[i].geodesic, weight / merged});
    }
    if (auto v = validate(out))
        throw NonEarthquakeMap("recover_measure: recovered atoms are not a lamination: " +
                               v->describe());
    return out;
}

// Post-composes with the unique Mobius map returning the images of the
// angles {0, pi/2, pi} (the points 1, i, -1) to themselves.
inline PiecewiseMobiusCircleMap normalize(const PiecewiseMobiusCircleMap& h) {
    BoundaryPoint one(0.0), eye(half_pi), minus_one(M_PI);
    MobiusMap n = mobius_through(h.apply(one), one, h.apply(eye), eye, h.apply(minus_one),
                                 minus_one);
    return h.post_compose(n);
}

// Normalized boundary map of the earthquake along t * lam. Throws on t < 0
// (flip the convention flag for right earthquakes instead).
inline PiecewiseMobiusCircleMap earthquake_path(const MeasuredLamination& lam, double t,
                                                Complex base) {
    if (t < 0.0)
        throw DegenerateInput("earthquake_path: negative time; use the right-earthquake convention");
    if (t == 0.0) return PiecewiseMobiusCircleMap{};
    return normalize(earthquake_boundary(EarthquakeMap(scale_weights(lam, t), base)));
}

// Image of a lamination under a boundary homeomorphism: endpoints mapped
// through the circle map, weights kept. For an earthquake boundary map this
// is the image lamination of the earthquake.
inline MeasuredLamination pushforward(const PiecewiseMobiusCircleMap& h,
                                      const MeasuredLamination& lam) {
    MeasuredLamination out;
    out.atoms.reserve(lam.size());
    for (const auto& atom : lam.atoms)
        out.atoms.push_back(
            {Geodesic(h.apply(atom.geodesic.p), h.apply(atom.geodesic.q)), atom.weight});
    return out;
}

// A disk point off every atom of the lamination: the origin if possible,
// otherwise a deterministic spiral of nearby points.
inline Complex off_fault_base(const MeasuredLamination& lam) {
    auto clear = [&](Complex z) {
        for (const auto& atom : lam.atoms)
            if (std::fabs(signed_side(atom.geodesic.p, atom.geodesic.q, z)) <= 1e-9)
                return false;
        return true;
    };
    Complex z{0.0, 0.0};
    if (clear(z)) return z;
    for (int k = 1; k < 64; ++k) {
        z = std::polar(0.02 * k, 2.39996322972865332 * k);
        if (std::abs(z) < 0.95 && clear(z)) return z;
    }
    throw DegenerateInput("off_fault_base: no clear base point found");
}

// --- Barycentric extension -------------------------------------------------

// Conformal barycenter of the push-forward under h of the harmonic measure
// at z, located by a damped fixed-point iteration on the barycenter vector
// field. Satisfies conformal naturality within a small multiple of tol.
inline Complex barycentric_extension(const PiecewiseMobiusCircleMap& h, Complex z, double tol,
                                     int max_iter = 2000) {
    if (!(tol > 0.0)) throw DegenerateInput("barycentric_extension: tol must be positive");
    if (std::abs(z) >= 1.0) throw DegenerateInput("barycentric_extension: z not in the disk");

    // Quadrature nodes: Gauss-Legendre on each breakpoint arc, subdivided.
    static const double gl_x[8] = {-0.9602898564975363, -0.7966664774136267,
                                   -0.5255324099163290, -0.1834346424956498,
                                   0.1834346424956498,  0.5255324099163290,
                                   0.7966664774136267,  0.9602898564975363};
    static const double gl_w[8] = {0.1012285362903763, 0.2223810344533745,
                                   0.3137066458778873, 0.3626837833783620,
                                   0.3626837833783620, 0.3137066458778873,
                                   0.2223810344533745, 0.1012285362903763};
    std::vector<double> nodes;
    std::vector<double> weights; // includes the Poisson kernel at z
    std::vector<double> cuts = h.breakpoints;
    if (cuts.empty()) cuts = {0.0};
    std::size_t m = cuts.size();
    for (std::size_t i = 0; i < m; ++i) {
        double s = cuts[i];
        double len = m == 1 ? two_pi : ccw_from(s, cuts[(i + 1) % m]);
        if (len == 0.0) len = two_pi;
        int segs = std::max(1, static_cast<int>(std::ceil(len / 0.1)));
        for (int k = 0; k < segs; ++k) {
            double a = s + len * k / segs, b = s + len * (k + 1) / segs;
            double mid = (a + b) / 2.0, half = (b - a) / 2.0;
            for (int j = 0; j < 8; ++j) {
                double th = mid + half * gl_x[j];
                Complex zeta = std::polar(1.0, th);
                double poisson = (1.0 - std::norm(z)) / std::norm(zeta - z);
                nodes.push_back(normalize_angle(th));
                weights.push_back(gl_w[j] * half * poisson / two_pi);
            }
        }
    }
    std::vector<Complex> images(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
        images[i] = BoundaryPoint(h.apply(BoundaryPoint(nodes[i])).angle).unit();

    auto field = [&](Complex w) {
        Complex f{0.0, 0.0};
        for (std::size_t i = 0; i < images.size(); ++i)
            f += weights[i] * (images[i] - w) / (1.0 - std::conj(w) * images[i]);
        return f;
    };

    Complex w = z;
    double damping = 0.5;
    for (int it = 0; it < max_iter; ++it) {
        Complex f = field(w);
        if (std::abs(f) <= tol) return w;
        Complex step = damping * f;
        w = (w + step) / (1.0 + std::conj(w) * step);
        if (std::abs(w) > 0.999999) w *= 0.999999 / std::abs(w);
    }
    throw NonConvergence("barycentric_extension: iteration did not reach tolerance",
                         std::abs(field(w)));
}

} // namespace solquake
