#pragma once

// Liouville measure on boxes of geodesics, pullbacks under piecewise-Mobius
// circle maps, Holder test functions, nu-norm brackets, the Frechet metric
// on discrete measures, and a cross-ratio distortion diagnostic for
// quasisymmetric closeness.
//
// The nu-norm of a signed discrete measure (the difference of two
// laminations) is reported as a bracket. The lower end is the best value of
// |(m1-m2)(phi)| over a family of admissible test functions actually
// evaluated; the upper end certifies every test function supported on any
// box of a candidate family, by pairing nearby atoms of opposite sign
// (|phi(g)-phi(g')| <= d(g,g')^nu in box coordinates) and charging
// unmatched mass at sup|phi| <= 1. Every box a sampled test function lives
// on is also a member of the upper-bound family, so lower <= upper holds by
// construction.

#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "solquake/earthquake.hpp"
#include "solquake/hyperbolic.hpp"
#include "solquake/lamination.hpp"

namespace solquake {

inline constexpr double log_two = 0.69314718055994530941723212145817657;

// Liouville mass log |((a-c)(b-d)) / ((a-d)(b-c))| of a box; positive for
// every valid box.
inline double liouville_box(const GeodesicBox& q) {
    Complex a = q.a.unit(), b = q.b.unit(), c = q.c.unit(), d = q.d.unit();
    double num = std::abs(a - c) * std::abs(b - d);
    double den = std::abs(a - d) * std::abs(b - c);
    if (den == 0.0 || num == 0.0) throw DegenerateInput("liouville_box: degenerate quadruple");
    return std::log(num / den);
}

// Forward image of a box under a piecewise map. Throws BreakpointCollision
// if a corner lies on a breakpoint (within tol).
inline GeodesicBox apply_box(const PiecewiseMobiusCircleMap& h, const GeodesicBox& q,
                             double tol = exact_tol) {
    for (double corner : q.corner_angles())
        for (double bp : h.breakpoints)
            if (angle_dist(corner, bp) <= tol)
                throw BreakpointCollision("apply_box: box corner on a breakpoint");
    return GeodesicBox(h.apply(q.a), h.apply(q.b), h.apply(q.c), h.apply(q.d));
}

namespace detail {

// Disk-model (SU(1,1)-like) form of a real half-plane matrix: the action
// on unit-circle values is z -> (alpha z + beta) / (conj(beta) z +
// conj(alpha)) with |alpha|^2 - |beta|^2 = 1.
struct DiskForm {
    Complex alpha, beta;

    explicit DiskForm(const MobiusMap& m)
        : alpha(Complex(-(m.a + m.d), m.c - m.b) / 2.0),
          beta(Complex(-(m.a - m.d), m.c + m.b) / 2.0) {}

    Complex apply(Complex z) const {
        return (alpha * z + beta) / (std::conj(beta) * z + std::conj(alpha));
    }
    Complex denominator(Complex z) const { return std::conj(beta) * z + std::conj(alpha); }
};

} // namespace detail

// (h_* L)(Q) = L(h^{-1} Q), each corner inverted through the piece whose
// image arc contains it. Cross-ratio factors between corners inverted by
// the same piece use the exact Mobius difference formula
// N(u) - N(v) = (u - v) / (den(u) den(v)), which keeps the value accurate
// even when the preimage box is exponentially thin (earthquake paths at
// large time). Throws BreakpointCollision if a corner coincides with the
// image of a breakpoint.
inline double pullback_liouville(const PiecewiseMobiusCircleMap& h, const GeodesicBox& q,
                                 double tol = exact_tol) {
    if (h.pieces.empty()) return liouville_box(q);
    PiecewiseMobiusCircleMap inv = h.inverse();
    std::array<double, 4> corners = q.corner_angles();
    for (double corner : corners)
        for (double bp : inv.breakpoints)
            if (angle_dist(corner, bp) <= tol)
                throw BreakpointCollision("pullback_liouville: box corner on a breakpoint image");

    std::array<std::size_t, 4> piece{};
    std::array<Complex, 4> unit{};
    std::array<Complex, 4> image{};
    std::vector<detail::DiskForm> forms;
    forms.reserve(inv.pieces.size());
    for (const auto& m : inv.pieces) forms.emplace_back(m);
    for (int k = 0; k < 4; ++k) {
        piece[k] = inv.piece_index(corners[k]);
        unit[k] = BoundaryPoint(corners[k]).unit();
        image[k] = forms[piece[k]].apply(unit[k]);
    }
    auto factor = [&](int i, int j) {
        if (piece[i] == piece[j]) {
            const detail::DiskForm& f = forms[piece[i]];
            return std::abs(unit[i] - unit[j]) /
                   (std::abs(f.denominator(unit[i])) * std::abs(f.denominator(unit[j])));
        }
        return std::abs(image[i] - image[j]);
    };
    double num = factor(0, 2) * factor(1, 3);
    double den = factor(0, 3) * factor(1, 2);
    if (num == 0.0 || den == 0.0)
        throw DegenerateInput("pullback_liouville: degenerate preimage box");
    return std::log(num / den);
}

// The standard isometry from the reference box (-1,-i)x(1,i) onto Q,
// matching corners in order. Q must have Liouville mass log 2 (within tol)
// for the fourth corner to match.
inline MobiusMap theta_of_box(const GeodesicBox& q, double tol = 1e-9) {
    if (std::fabs(liouville_box(q) - log_two) > tol)
        throw DegenerateInput("theta_of_box: box mass is not log 2");
    GeodesicBox r = GeodesicBox::reference();
    return mobius_through(r.a, q.a, r.b, q.b, r.c, q.c);
}

// Angle metric on geodesics seen as unordered endpoint pairs: the smaller
// over the two pairings of the larger coordinate distance.
inline double geodesic_angle_dist(double x, double y, double x1, double y1) {
    double straight = std::max(angle_dist(x, x1), angle_dist(y, y1));
    double swapped = std::max(angle_dist(x, y1), angle_dist(y, x1));
    return std::min(straight, swapped);
}

// A nu-test function: a bump supported in an admissible box Q (Liouville
// mass log 2), with sup <= 1 and nu-Holder seminorm <= 1 in the coordinates
// of the standard isometry of Q, both guaranteed by construction:
//   phi = min(height, ((radius - d)^+)^nu),
// d the angle metric distance to the peak in reference coordinates.
struct TestFunction {
    GeodesicBox box;
    double nu;
    double peak_x, peak_y;  // reference coordinates: peak_x in (pi, 3pi/2), peak_y in (0, pi/2)
    double radius;
    double height;
    MobiusMap theta_inv;    // Q -> reference box

    double operator()(const Geodesic& g) const {
        double u = theta_inv.apply(g.p).angle;
        double v = theta_inv.apply(g.q).angle;
        GeodesicBox ref = GeodesicBox::reference();
        bool u_in_x = in_arc(u, ref.a.angle, ref.b.angle);
        bool v_in_x = in_arc(v, ref.a.angle, ref.b.angle);
        double x, y;
        if (u_in_x && in_arc(v, ref.c.angle, ref.d.angle)) {
            x = u;
            y = v;
        } else if (v_in_x && in_arc(u, ref.c.angle, ref.d.angle)) {
            x = v;
            y = u;
        } else {
            return 0.0;
        }
        double d = std::max(angle_dist(x, peak_x), angle_dist(y, peak_y));
        double s = radius - d;
        if (s <= 0.0) return 0.0;
        return std::min(height, std::pow(s, nu));
    }
};

// Builds an admissible test function, clamping the radius so the support
// stays inside the box and the height to <= 1.
inline TestFunction make_test_function(const GeodesicBox& box, double nu, double peak_x,
                                       double peak_y, double radius, double height = 1.0) {
    if (!(nu > 0.0 && nu <= 1.0)) throw DegenerateInput("test function: nu must be in (0,1]");
    GeodesicBox ref = GeodesicBox::reference();
    if (!in_arc(peak_x, ref.a.angle, ref.b.angle) || !in_arc(peak_y, ref.c.angle, ref.d.angle))
        throw DegenerateInput("test function: peak outside the reference box");
    double margin = std::min(std::min(ccw_from(ref.a.angle, peak_x), ccw_from(peak_x, ref.b.angle)),
                             std::min(ccw_from(ref.c.angle, peak_y), ccw_from(peak_y, ref.d.angle)));
    TestFunction f{box,
                   nu,
                   peak_x,
                   peak_y,
                   std::min(radius, margin),
                   std::min(height, 1.0),
                   theta_of_box(box).inverse()};
    return f;
}

struct HolderNormBracket {
    double lower = 0.0, upper = 0.0;
};

// --- signed atom differences ------------------------------------------------

struct SignedAtom {
    Geodesic geodesic;
    double mass; // signed
};

inline std::vector<SignedAtom> signed_difference(const MeasuredLamination& m1,
                                                 const MeasuredLamination& m2,
                                                 double match_tol = 1e-9) {
    std::vector<SignedAtom> diff;
    std::vector<bool> used(m2.size(), false);
    for (const auto& a : m1.atoms) {
        double c = a.weight;
        for (std::size_t j = 0; j < m2.size(); ++j) {
            if (used[j]) continue;
            if (same_geodesic(a.geodesic, m2.atoms[j].geodesic, match_tol)) {
                c -= m2.atoms[j].weight;
                used[j] = true;
                break;
            }
        }
        if (std::fabs(c) > 1e-15) diff.push_back({a.geodesic, c});
    }
    for (std::size_t j = 0; j < m2.size(); ++j)
        if (!used[j] && m2.atoms[j].weight > 1e-15)
            diff.push_back({m2.atoms[j].geodesic, -m2.atoms[j].weight});
    return diff;
}

// --- box growth --------------------------------------------------------------

namespace detail {

struct ArmPair {
    // Counterclockwise arcs [x1,x2] and [y1,y2]; (x-arm, then y-arm) in
    // counterclockwise order around the circle.
    double x1, x2, y1, y2;
    bool valid() const {
        double t2 = ccw_from(x1, x2), t3 = ccw_from(x1, y1), t4 = ccw_from(x1, y2);
        return t3 > t2 && t4 > t3 && t4 < two_pi;
    }
};

inline double arms_liouville(const ArmPair& p) {
    return liouville_box(GeodesicBox(BoundaryPoint(p.x1), BoundaryPoint(p.x2),
                                     BoundaryPoint(p.y1), BoundaryPoint(p.y2)));
}

// Grows both arms toward each other, closing the two gaps at proportional
// rates, until the Liouville mass reaches log 2; then nudges corners off
// the listed angles. Returns nullopt when the target is unreachable or the
// start configuration already exceeds log 2.
inline std::optional<GeodesicBox> grow_to_log2(double x1, double x2, double y1, double y2,
                                               const std::vector<double>& avoid,
                                               bool grow_x_arm = true) {
    double gap1 = ccw_from(x2, y1); // between x-arm head and y-arm tail
    double gap2 = ccw_from(y2, x1); // between y-arm head and x-arm tail
    if (gap1 <= 4e-9 || gap2 <= 4e-9) return std::nullopt;
    double r1 = gap1 / (gap1 + gap2), r2 = gap2 / (gap1 + gap2);
    auto arms_at = [&](double s) {
        ArmPair p;
        if (grow_x_arm) {
            p.x1 = normalize_angle(x1 - s * r2);
            p.x2 = normalize_angle(x2 + s * r1);
        } else {
            p.x1 = x1;
            p.x2 = x2;
        }
        p.y1 = normalize_angle(y1 - s * r1);
        p.y2 = normalize_angle(y2 + s * r2);
        return p;
    };
    // Largest growth keeping both gaps open (gap1 closes at rate r1 from
    // each side when both arms grow, else from one).
    double denom = grow_x_arm ? 2.0 : 1.0;
    double s_max = std::min(gap1 / (denom * r1), gap2 / (denom * r2));
    double s_hi = s_max * (1.0 - 1e-7);
    // Ensure a strictly valid start.
    double s_lo = 1e-9;
    ArmPair start = arms_at(s_lo);
    if (!start.valid()) return std::nullopt;
    double l_lo = arms_liouville(start);
    if (l_lo > log_two) return std::nullopt;
    ArmPair end = arms_at(s_hi);
    if (!end.valid() || arms_liouville(end) < log_two) return std::nullopt;
    for (int it = 0; it < 200; ++it) {
        double mid = (s_lo + s_hi) / 2.0;
        if (arms_liouville(arms_at(mid)) < log_two)
            s_lo = mid;
        else
            s_hi = mid;
        if (s_hi - s_lo < 1e-15 * (1.0 + s_hi)) break;
    }
    ArmPair p = arms_at((s_lo + s_hi) / 2.0);
    // Nudge corners off avoided angles, then restore the mass by moving one
    // clean corner.
    double corners[4] = {p.x1, p.x2, p.y1, p.y2};
    bool nudged = false;
    for (double& corner : corners) {
        for (int rounds = 0; rounds < 8; ++rounds) {
            bool hit = false;
            for (double a : avoid)
                if (angle_dist(corner, a) <= 5e-12) hit = true;
            if (!hit) break;
            corner = normalize_angle(corner + 2e-11);
            nudged = true;
        }
    }
    p.x1 = corners[0];
    p.x2 = corners[1];
    p.y1 = corners[2];
    p.y2 = corners[3];
    if (!p.valid()) return std::nullopt;
    if (nudged && std::fabs(arms_liouville(p) - log_two) > 5e-10) return std::nullopt;
    return GeodesicBox(BoundaryPoint(p.x1), BoundaryPoint(p.x2), BoundaryPoint(p.y1),
                       BoundaryPoint(p.y2));
}

// Minimal counterclockwise arc covering a set of angles: the complement of
// the largest gap.
inline std::pair<double, double> minimal_arc(std::vector<double> angles) {
    std::sort(angles.begin(), angles.end());
    std::size_t n = angles.size();
    double best_gap = -1.0;
    std::size_t best = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double next = angles[(i + 1) % n];
        double gap = ccw_from(angles[i], next);
        if (gap == 0.0 && n > 1) gap = 0.0;
        if (n == 1) gap = two_pi;
        if (gap > best_gap) {
            best_gap = gap;
            best = i;
        }
    }
    return {angles[(best + 1) % n], angles[best]};
}

} // namespace detail

// --- nu-norm bracket ----------------------------------------------------------

namespace detail {

struct DiffBoxes {
    std::vector<SignedAtom> diff;
    struct Candidate {
        GeodesicBox box;
        MobiusMap theta_inv;
        std::vector<std::size_t> inside;                 // indices into diff
        std::vector<std::pair<double, double>> ref;      // reference coords (x,y)
    };
    std::vector<Candidate> boxes;
};

inline std::optional<DiffBoxes::Candidate> candidate_from_box(
    const std::vector<SignedAtom>& diff, const GeodesicBox& box) {
    DiffBoxes::Candidate c{box, MobiusMap(), {}, {}};
    try {
        c.theta_inv = theta_of_box(box, 2e-9).inverse();
    } catch (const Error&) {
        return std::nullopt;
    }
    GeodesicBox ref = GeodesicBox::reference();
    for (std::size_t i = 0; i < diff.size(); ++i) {
        if (!box.contains(diff[i].geodesic)) continue;
        double u = c.theta_inv.apply(diff[i].geodesic.p).angle;
        double v = c.theta_inv.apply(diff[i].geodesic.q).angle;
        if (!in_arc(u, ref.a.angle, ref.b.angle)) std::swap(u, v);
        if (!in_arc(u, ref.a.angle, ref.b.angle) || !in_arc(v, ref.c.angle, ref.d.angle))
            continue;
        c.inside.push_back(i);
        c.ref.emplace_back(u, v);
    }
    if (c.inside.empty()) return std::nullopt;
    return c;
}

inline void add_candidate(DiffBoxes& db, const std::optional<GeodesicBox>& box,
                          std::map<std::vector<std::size_t>, bool>& seen) {
    if (!box) return;
    auto cand = candidate_from_box(db.diff, *box);
    if (!cand) return;
    auto key = cand->inside;
    if (seen.count(key)) return;
    seen[key] = true;
    db.boxes.push_back(std::move(*cand));
}

// Candidate admissible boxes adapted to the signed difference: grown
// minimal boxes of single atoms, of pairs under both endpoint pairings,
// and of arc-delimited clusters.
inline DiffBoxes build_diff_boxes(const MeasuredLamination& m1, const MeasuredLamination& m2) {
    DiffBoxes db;
    db.diff = signed_difference(m1, m2);
    if (db.diff.empty()) return db;
    std::vector<double> avoid;
    for (const auto& a : db.diff) {
        avoid.push_back(a.geodesic.p.angle);
        avoid.push_back(a.geodesic.q.angle);
    }
    std::map<std::vector<std::size_t>, bool> seen;

    auto try_arms = [&](std::vector<double> xs, std::vector<double> ys) {
        auto [x1, x2] = detail::minimal_arc(std::move(xs));
        auto [y1, y2] = detail::minimal_arc(std::move(ys));
        // Require x-arm then y-arm counterclockwise; otherwise swap.
        if (ccw_from(x2, y1) > ccw_from(x2, x1) && ccw_from(x1, x2) + ccw_from(y1, y2) < two_pi) {
            add_candidate(db, detail::grow_to_log2(x1, x2, y1, y2, avoid), seen);
        }
        add_candidate(db, detail::grow_to_log2(y1, y2, x1, x2, avoid), seen);
    };

    const auto& d = db.diff;
    for (std::size_t i = 0; i < d.size(); ++i)
        try_arms({d[i].geodesic.p.angle}, {d[i].geodesic.q.angle});
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = i + 1; j < d.size(); ++j) {
            try_arms({d[i].geodesic.p.angle, d[j].geodesic.p.angle},
                     {d[i].geodesic.q.angle, d[j].geodesic.q.angle});
            try_arms({d[i].geodesic.p.angle, d[j].geodesic.q.angle},
                     {d[i].geodesic.q.angle, d[j].geodesic.p.angle});
        }
    // Arc-delimited clusters: one arm spans endpoints inside [s,e], the
    // other the minimal arc of their partners.
    std::vector<double> endpoints = avoid;
    std::sort(endpoints.begin(), endpoints.end());
    std::size_t m = endpoints.size();
    if (m > 2) {
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                if (i == j) continue;
                double s = endpoints[i], e = endpoints[j];
                std::vector<double> xs, ys;
                for (const auto& atom : d) {
                    double u = atom.geodesic.p.angle, v = atom.geodesic.q.angle;
                    bool ui = ccw_from(s, u) <= ccw_from(s, e) + 1e-15;
                    bool vi = ccw_from(s, v) <= ccw_from(s, e) + 1e-15;
                    if (ui && !vi) {
                        xs.push_back(u);
                        ys.push_back(v);
                    } else if (vi && !ui) {
                        xs.push_back(v);
                        ys.push_back(u);
                    }
                }
                if (xs.size() >= 2) try_arms(std::move(xs), std::move(ys));
            }
    }
    return db;
}

// Sound bound for |sum_i c_i phi(g_i)| over admissible test functions
// supported on this candidate box. Any such phi satisfies
// |phi(g)| <= min(1, margin(g)^nu) with margin the distance from g to the
// box boundary in standard coordinates, and |phi(g) - phi(g')| <=
// min(d(g,g')^nu, margin(g)^nu + margin(g')^nu, 2): greedily pair
// opposite-sign atoms, charge leftovers at their margin bound.
inline double matched_cost(const DiffBoxes& db, const DiffBoxes::Candidate& c, double nu) {
    GeodesicBox ref = GeodesicBox::reference();
    std::vector<double> mass(c.inside.size());
    std::vector<double> margin(c.inside.size());
    for (std::size_t k = 0; k < c.inside.size(); ++k) {
        mass[k] = db.diff[c.inside[k]].mass;
        margin[k] = std::min(
            std::min(ccw_from(ref.a.angle, c.ref[k].first), ccw_from(c.ref[k].first, ref.b.angle)),
            std::min(ccw_from(ref.c.angle, c.ref[k].second),
                     ccw_from(c.ref[k].second, ref.d.angle)));
    }
    auto single_bound = [&](std::size_t k) {
        return std::min(1.0, std::pow(margin[k], nu));
    };
    struct Pair {
        double d;
        std::size_t i, j;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < mass.size(); ++i)
        for (std::size_t j = 0; j < mass.size(); ++j) {
            if (mass[i] <= 0.0 || mass[j] >= 0.0) continue;
            double dd = geodesic_angle_dist(c.ref[i].first, c.ref[i].second, c.ref[j].first,
                                            c.ref[j].second);
            pairs.push_back({dd, i, j});
        }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.d < b.d; });
    double cost = 0.0;
    for (const auto& pr : pairs) {
        double transfer = std::min(mass[pr.i], -mass[pr.j]);
        if (transfer <= 0.0) continue;
        cost += transfer *
                std::min(std::pow(pr.d, nu), single_bound(pr.i) + single_bound(pr.j));
        mass[pr.i] -= transfer;
        mass[pr.j] += transfer;
    }
    for (std::size_t k = 0; k < mass.size(); ++k) cost += std::fabs(mass[k]) * single_bound(k);
    return cost;
}

inline double evaluate_on_diff(const DiffBoxes& db, const TestFunction& phi) {
    double s = 0.0;
    for (const auto& atom : db.diff) s += atom.mass * phi(atom.geodesic);
    return std::fabs(s);
}

} // namespace detail

// Bracket on the nu-norm || m1 - m2 ||_nu. The lower end is attained by an
// explicit admissible test function; the upper end certifies all test
// functions supported over the candidate box family (adapted boxes plus
// every sampled box). `budget` counts sampled test functions and is a
// prefix of a deterministic seeded sequence, so the lower end never
// decreases as the budget grows.
inline HolderNormBracket nu_norm_diff(const MeasuredLamination& m1, const MeasuredLamination& m2,
                                      double nu, int budget, std::uint64_t seed = 0) {
    if (!(nu > 0.0 && nu <= 1.0)) throw DegenerateInput("nu_norm_diff: nu must be in (0,1]");
    detail::DiffBoxes db = detail::build_diff_boxes(m1, m2);
    HolderNormBracket bracket;
    if (db.diff.empty()) return bracket;

    GeodesicBox ref = GeodesicBox::reference();
    auto sample_peaks = [&](const detail::DiffBoxes::Candidate& c, int& left) {
        for (std::size_t k = 0; k < c.inside.size() && left > 0; ++k) {
            double margin =
                std::min(std::min(ccw_from(ref.a.angle, c.ref[k].first),
                                  ccw_from(c.ref[k].first, ref.b.angle)),
                         std::min(ccw_from(ref.c.angle, c.ref[k].second),
                                  ccw_from(c.ref[k].second, ref.d.angle)));
            std::vector<double> radii = {margin};
            for (std::size_t l = 0; l < c.inside.size(); ++l) {
                if (l == k) continue;
                double dd = geodesic_angle_dist(c.ref[k].first, c.ref[k].second, c.ref[l].first,
                                                c.ref[l].second);
                if (dd > 1e-12 && dd < margin) radii.push_back(dd * (1.0 - 1e-9));
            }
            for (double r : radii) {
                if (left <= 0) break;
                if (r <= 0.0) continue;
                TestFunction phi{c.box, nu, c.ref[k].first, c.ref[k].second, r, 1.0, c.theta_inv};
                bracket.lower = std::max(bracket.lower, detail::evaluate_on_diff(db, phi));
                --left;
            }
        }
    };

    int left = budget;
    for (const auto& c : db.boxes) sample_peaks(c, left);

    // Seeded random boxes, added to the certified family as they are used.
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> uang(0.0, two_pi);
    std::uniform_real_distribution<double> upush(-2.0, 2.0);
    std::map<std::vector<std::size_t>, bool> seen;
    for (const auto& c : db.boxes) seen[c.inside] = true;
    int guard = 0;
    while (left > 0 && guard < 32 * budget + 64) {
        ++guard;
        MobiusMap m = MobiusMap::rotation(uang(rng)) *
                      translation_along_oriented(BoundaryPoint(M_PI), BoundaryPoint(0.0),
                                                 upush(rng)) *
                      MobiusMap::rotation(uang(rng));
        GeodesicBox box = apply_box(m, ref);
        auto cand = detail::candidate_from_box(db.diff, box);
        if (!cand) continue;
        if (!seen.count(cand->inside)) {
            seen[cand->inside] = true;
            db.boxes.push_back(*cand);
        }
        sample_peaks(db.boxes.back(), left);
    }

    for (const auto& c : db.boxes)
        bracket.upper = std::max(bracket.upper, detail::matched_cost(db, c, nu));
    if (bracket.upper < bracket.lower) bracket.upper = bracket.lower; // numerical safety
    return bracket;
}

// Truncated Frechet metric: sum over n = 1..n_max of (1/n^2) times the
// bracket midpoint of the (1/n)-norm. Symmetric by construction; zero iff
// every bracket is zero.
inline double frechet_dist(const MeasuredLamination& m1, const MeasuredLamination& m2,
                           int n_max = 8, int budget = 256, std::uint64_t seed = 0) {
    if (n_max < 1) throw DegenerateInput("frechet_dist: n_max must be >= 1");
    double s = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        HolderNormBracket b = nu_norm_diff(m1, m2, 1.0 / n, budget, seed);
        s += (b.lower + b.upper) / 2.0 / (static_cast<double>(n) * n);
    }
    return s;
}

// Same truncation, using only the certified upper ends.
inline double frechet_dist_upper(const MeasuredLamination& m1, const MeasuredLamination& m2,
                                 int n_max = 8, int budget = 256, std::uint64_t seed = 0) {
    double s = 0.0;
    for (int n = 1; n <= n_max; ++n)
        s += nu_norm_diff(m1, m2, 1.0 / n, budget, seed).upper /
             (static_cast<double>(n) * n);
    return s;
}

// Cross-ratio distortion proxy: sup over the family of
// |L(h(Q)) - log 2| for boxes of mass log 2. Zero for Mobius maps.
inline double qs_distortion(const PiecewiseMobiusCircleMap& h,
                            const std::vector<GeodesicBox>& family) {
    double worst = 0.0;
    for (const auto& q : family) {
        if (std::fabs(liouville_box(q) - log_two) > 1e-9)
            throw DegenerateInput("qs_distortion: family box mass is not log 2");
        worst = std::max(worst, std::fabs(liouville_box(apply_box(h, q)) - log_two));
    }
    return worst;
}

// A small box around each target geodesic containing no other endpoint of
// the context set: arm half-widths are a fraction of the distance to the
// nearest other endpoint. Used to certify per-atom mass identities.
inline std::vector<GeodesicBox> isolating_boxes(const std::vector<Geodesic>& targets,
                                                const std::vector<Geodesic>& context,
                                                double fraction = 1.0 / 3.0) {
    std::vector<double> endpoints;
    for (const auto& g : targets) {
        endpoints.push_back(g.p.angle);
        endpoints.push_back(g.q.angle);
    }
    for (const auto& g : context) {
        endpoints.push_back(g.p.angle);
        endpoints.push_back(g.q.angle);
    }
    std::vector<GeodesicBox> boxes;
    for (const auto& g : targets) {
        auto halfwidth = [&](double at) {
            double best = M_PI;
            for (double e : endpoints) {
                double d = angle_dist(at, e);
                if (d > 1e-13) best = std::min(best, d);
            }
            return best * fraction;
        };
        double hp = halfwidth(g.p.angle), hq = halfwidth(g.q.angle);
        boxes.emplace_back(BoundaryPoint(g.p.angle - hp), BoundaryPoint(g.p.angle + hp),
                           BoundaryPoint(g.q.angle - hq), BoundaryPoint(g.q.angle + hq));
    }
    return boxes;
}

// Standard distortion box family: the orbit of the reference box under a
// fixed lattice of Mobius maps, plus boxes adapted to the atom endpoints of
// the measures under study (arm ends placed at fractions of the endpoint
// separations, where fault distortion concentrates).
inline std::vector<GeodesicBox> standard_box_family(
    const std::vector<const MeasuredLamination*>& measures, int rotations = 12,
    std::vector<double> pushes = {-2.0, -1.0, 0.0, 1.0, 2.0},
    std::vector<double> scales = {0.5, 1.0, 2.0}) {
    std::vector<GeodesicBox> family;
    GeodesicBox ref = GeodesicBox::reference();
    std::vector<double> endpoints;
    for (const auto* m : measures)
        for (const auto& atom : m->atoms) {
            endpoints.push_back(atom.geodesic.p.angle);
            endpoints.push_back(atom.geodesic.q.angle);
        }
    auto clear_of_endpoints = [&](const GeodesicBox& q) {
        for (double c : q.corner_angles())
            for (double e : endpoints)
                if (angle_dist(c, e) <= 1e-11) return false;
        return true;
    };
    for (int k = 0; k < rotations; ++k)
        for (double p : pushes) {
            MobiusMap m = MobiusMap::rotation(two_pi * k / rotations) *
                          translation_along_oriented(BoundaryPoint(M_PI), BoundaryPoint(0.0), p);
            GeodesicBox q = apply_box(m, ref);
            if (clear_of_endpoints(q)) family.push_back(q);
        }
    for (std::size_t i = 0; i < endpoints.size(); ++i)
        for (std::size_t j = 0; j < endpoints.size(); ++j) {
            if (i == j) continue;
            double u = endpoints[i], delta = angle_dist(endpoints[i], endpoints[j]);
            if (delta <= 1e-11) continue;
            for (double s : scales) {
                // A box with one arm at scale s*delta across u, the other
                // grown from the antipode to mass log 2.
                double half = std::min(s * delta / 2.0, 0.6);
                double x1 = normalize_angle(u - half), x2 = normalize_angle(u + half);
                double opp = normalize_angle(u + M_PI);
                auto grown = detail::grow_to_log2(x1, x2, normalize_angle(opp - 1e-3),
                                                  normalize_angle(opp + 1e-3), endpoints,
                                                  /*grow_x_arm=*/false);
                if (grown && clear_of_endpoints(*grown)) family.push_back(*grown);
                // Fully local boxes: the reference box pushed toward u so
                // that all four corners live at scale ~ s*delta around u.
                double push = std::log(2.0 / std::min(1.0, s * delta));
                for (int rot = 0; rot < 4; ++rot) {
                    MobiusMap zoom =
                        translation_along_oriented(BoundaryPoint(u + M_PI), BoundaryPoint(u),
                                                   push) *
                        MobiusMap::rotation(u + rot * half_pi / 2.0);
                    GeodesicBox q = apply_box(zoom, ref);
                    if (clear_of_endpoints(q)) family.push_back(q);
                }
            }
        }
    // The lattice transplanted into a canonical frame at each endpoint
    // pair: the frame sends (u, v, far-arc midpoint) to fixed positions,
    // so the family around a shrinking pair is self-similar.
    for (std::size_t i = 0; i < endpoints.size(); ++i)
        for (std::size_t j = 0; j < endpoints.size(); ++j) {
            if (i == j) continue;
            double u = endpoints[i], v = endpoints[j];
            double delta = ccw_from(u, v);
            if (delta <= 1e-11 || delta >= M_PI) continue;
            double mid = normalize_angle(v + ccw_from(v, u) / 2.0);
            MobiusMap frame_inv;
            try {
                frame_inv = mobius_through(BoundaryPoint(M_PI - 0.5), BoundaryPoint(u),
                                           BoundaryPoint(M_PI + 0.5), BoundaryPoint(v),
                                           BoundaryPoint(0.0), BoundaryPoint(mid));
            } catch (const DegenerateInput&) {
                continue;
            }
            for (int k = 0; k < rotations; ++k)
                for (double p : pushes) {
                    MobiusMap m =
                        frame_inv * MobiusMap::rotation(two_pi * k / rotations) *
                        translation_along_oriented(BoundaryPoint(M_PI), BoundaryPoint(0.0), p);
                    GeodesicBox q = apply_box(m, ref);
                    if (clear_of_endpoints(q)) family.push_back(q);
                }
        }
    return family;
}

} // namespace solquake
