#pragma once

// Exact primitives of the hyperbolic plane: boundary points on S^1, Mobius
// maps as real PSL(2,R) matrices, geodesics as unordered endpoint pairs,
// boxes of geodesics, and the crossing/separation predicates everything
// else is built from.
//
// The disk model is the canonical storage model (boundary points are angles,
// interior points are complex numbers with |z| < 1). The upper half-plane is
// used internally where formulas are simpler. The Cayley transform is fixed
// once and for all as z -> i(1+z)/(1-z); on the boundary it reads
// angle -> -cot(angle/2), with angle 0 corresponding to infinity.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "solquake/errors.hpp"

namespace solquake {

using Complex = std::complex<double>;

inline constexpr double two_pi = 6.28318530717958647692528676655900577;
inline constexpr double half_pi = 1.57079632679489661923132169163975144;

// Tolerance for exact-construction identities.
inline constexpr double exact_tol = 1e-12;
// Tolerance for composed-arithmetic identities.
inline constexpr double arith_tol = 1e-10;

inline double normalize_angle(double a) {
    a = std::fmod(a, two_pi);
    if (a < 0.0) a += two_pi;
    if (a >= two_pi) a = 0.0;
    return a;
}

// Circular distance in [0, pi].
inline double angle_dist(double a, double b) {
    double d = std::fabs(normalize_angle(a) - normalize_angle(b));
    return d > two_pi - d ? two_pi - d : d;
}

// Counterclockwise offset of x past s, in [0, 2pi).
inline double ccw_from(double s, double x) {
    return normalize_angle(x - s);
}

// A point of S^1 in the disk model, stored as an angle in [0, 2pi).
struct BoundaryPoint {
    double angle = 0.0;

    BoundaryPoint() = default;
    explicit BoundaryPoint(double a) : angle(normalize_angle(a)) {}

    Complex unit() const { return {std::cos(angle), std::sin(angle)}; }

    // Half-plane boundary coordinate; angle 0 maps to +infinity.
    double half_plane() const {
        if (angle == 0.0) return std::numeric_limits<double>::infinity();
        return -1.0 / std::tan(angle / 2.0);
    }

    static BoundaryPoint from_half_plane(double x) {
        if (std::isinf(x)) return BoundaryPoint(0.0);
        return BoundaryPoint(2.0 * std::atan2(1.0, -x));
    }
};

inline bool same_point(BoundaryPoint p, BoundaryPoint q, double tol = exact_tol) {
    return angle_dist(p.angle, q.angle) <= tol;
}

// Interior point conversions for the fixed Cayley transform.
inline Complex disk_to_half(Complex z) {
    return Complex(0.0, 1.0) * (1.0 + z) / (1.0 - z);
}
inline Complex half_to_disk(Complex w) {
    return (w - Complex(0.0, 1.0)) / (w + Complex(0.0, 1.0));
}

// Element of PSL(2,R): a real 2x2 matrix of determinant +1, identified with
// its negative. Acts on the upper half-plane and, through the fixed Cayley
// transform, on the disk and its boundary circle.
struct MobiusMap {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

    MobiusMap() = default;

    static MobiusMap identity() { return MobiusMap(); }

    // Normalizes the determinant to +1. Throws on degenerate or
    // orientation-reversing input.
    static MobiusMap from_entries(double a, double b, double c, double d) {
        double det = a * d - b * c;
        double scale = std::max({std::fabs(a), std::fabs(b), std::fabs(c), std::fabs(d)});
        if (!(det > 0.0) || !(scale > 0.0) || det < 1e-300 * scale * scale)
            throw DegenerateInput("MobiusMap: determinant must be positive");
        double s = std::sqrt(det);
        MobiusMap m;
        m.a = a / s;
        m.b = b / s;
        m.c = c / s;
        m.d = d / s;
        return m.canonical_sign();
    }

    MobiusMap canonical_sign() const {
        double t = a + d;
        bool flip = t < 0.0 || (t == 0.0 && (a < 0.0 || (a == 0.0 && b < 0.0)));
        if (!flip) return *this;
        MobiusMap m;
        m.a = -a;
        m.b = -b;
        m.c = -c;
        m.d = -d;
        return m;
    }

    MobiusMap inverse() const {
        MobiusMap m;
        m.a = d;
        m.b = -b;
        m.c = -c;
        m.d = a;
        return m.canonical_sign();
    }

    double trace() const { return a + d; }
    double det() const { return a * d - b * c; }

    friend MobiusMap operator*(const MobiusMap& m, const MobiusMap& n) {
        MobiusMap r;
        r.a = m.a * n.a + m.b * n.c;
        r.b = m.a * n.b + m.b * n.d;
        r.c = m.c * n.a + m.d * n.c;
        r.d = m.c * n.b + m.d * n.d;
        // Re-pin the determinant to +1 while its computed value is
        // trustworthy; for large-entry products the subtraction cancels
        // catastrophically and rescaling is projectively irrelevant, so it
        // is skipped there.
        double det = r.a * r.d - r.b * r.c;
        if (det > 0.25 && det < 4.0) {
            double s = std::sqrt(det);
            r.a /= s;
            r.b /= s;
            r.c /= s;
            r.d /= s;
        }
        return r.canonical_sign();
    }

    // Action on the extended real line (half-plane boundary).
    double apply_half(double x) const {
        if (std::isinf(x)) {
            if (c == 0.0) return std::numeric_limits<double>::infinity();
            return a / c;
        }
        double den = c * x + d;
        if (den == 0.0) return std::numeric_limits<double>::infinity();
        return (a * x + b) / den;
    }

    // Action on an interior half-plane point.
    Complex apply_half(Complex w) const {
        return (a * w + Complex(b)) / (c * w + Complex(d));
    }

    BoundaryPoint apply(BoundaryPoint p) const {
        return BoundaryPoint::from_half_plane(apply_half(p.half_plane()));
    }

    // Action on an interior disk point.
    Complex apply_disk(Complex z) const {
        return half_to_disk(apply_half(disk_to_half(z)));
    }

    bool is_identity(double tol = exact_tol) const {
        MobiusMap m = canonical_sign();
        return std::fabs(m.a - 1.0) <= tol && std::fabs(m.b) <= tol &&
               std::fabs(m.c) <= tol && std::fabs(m.d - 1.0) <= tol;
    }

    // Rotation of the disk about 0 by phi (counterclockwise).
    static MobiusMap rotation(double phi) {
        MobiusMap m;
        m.a = std::cos(phi / 2.0);
        m.b = std::sin(phi / 2.0);
        m.c = -std::sin(phi / 2.0);
        m.d = std::cos(phi / 2.0);
        return m.canonical_sign();
    }
};

// Entrywise distance up to the projective sign.
inline double mobius_dist(const MobiusMap& m, const MobiusMap& n) {
    double dp = std::max({std::fabs(m.a - n.a), std::fabs(m.b - n.b),
                          std::fabs(m.c - n.c), std::fabs(m.d - n.d)});
    double dm = std::max({std::fabs(m.a + n.a), std::fabs(m.b + n.b),
                          std::fabs(m.c + n.c), std::fabs(m.d + n.d)});
    return std::min(dp, dm);
}

// A complete geodesic in the disk, as an unordered pair of distinct ideal
// endpoints.
struct Geodesic {
    BoundaryPoint p, q;

    Geodesic(BoundaryPoint p_, BoundaryPoint q_) : p(p_), q(q_) {
        if (angle_dist(p.angle, q.angle) <= exact_tol)
            throw DegenerateInput("Geodesic: endpoints must be distinct");
    }
};

inline bool same_geodesic(const Geodesic& g, const Geodesic& h, double tol = exact_tol) {
    return (same_point(g.p, h.p, tol) && same_point(g.q, h.q, tol)) ||
           (same_point(g.p, h.q, tol) && same_point(g.q, h.p, tol));
}

// True iff x lies strictly inside the counterclockwise arc from s to e.
inline bool in_arc(double x, double s, double e) {
    double len = ccw_from(s, e);
    double rel = ccw_from(s, x);
    return rel > 0.0 && rel < len;
}

// Strict interleaving of the endpoint pairs on S^1. Sharing an endpoint
// (within tolerance) counts as not crossing.
inline bool geodesics_cross(const Geodesic& g, const Geodesic& h, double tol = exact_tol) {
    const double a1 = g.p.angle, a2 = g.q.angle;
    const double b1 = h.p.angle, b2 = h.q.angle;
    if (angle_dist(a1, b1) <= tol || angle_dist(a1, b2) <= tol ||
        angle_dist(a2, b1) <= tol || angle_dist(a2, b2) <= tol)
        return false;
    bool first = in_arc(b1, a1, a2);
    bool second = in_arc(b2, a1, a2);
    return first != second;
}

// Orientation-preserving map sending p -> 0 and q -> infinity on the
// half-plane boundary.
inline MobiusMap send_to_std(BoundaryPoint p, BoundaryPoint q) {
    double x = p.half_plane();
    double y = q.half_plane();
    if (std::isinf(x)) return MobiusMap::from_entries(0.0, 1.0, -1.0, y);
    if (std::isinf(y)) return MobiusMap::from_entries(1.0, -x, 0.0, 1.0);
    if (x < y) return MobiusMap::from_entries(1.0, -x, -1.0, y);
    return MobiusMap::from_entries(1.0, -x, 1.0, -y);
}

// Signed side of a disk point relative to the geodesic oriented p -> q:
// negative on the left of the oriented axis, positive on the right. The
// magnitude is the hyperbolic distance to the axis.
inline double signed_side(BoundaryPoint p, BoundaryPoint q, Complex z_disk) {
    MobiusMap s = send_to_std(p, q);
    Complex w = s.apply_half(disk_to_half(z_disk));
    return std::asinh(w.real() / w.imag());
}

// True iff z and w lie in different components of the disk minus g.
// Throws PointOnGeodesic if either point is on g (within tol).
inline bool separates(const Geodesic& g, Complex z, Complex w, double tol = exact_tol) {
    double sz = signed_side(g.p, g.q, z);
    double sw = signed_side(g.p, g.q, w);
    if (std::fabs(sz) <= tol || std::fabs(sw) <= tol)
        throw PointOnGeodesic("separates: point lies on the geodesic");
    return (sz < 0.0) != (sw < 0.0);
}

// Hyperbolic distance between interior disk points.
inline double hyp_dist(Complex p, Complex q) {
    double num = std::abs(p - q);
    double den = std::sqrt((1.0 - std::norm(p)) * (1.0 - std::norm(q)));
    return 2.0 * std::asinh(num / den);
}

// Hyperbolic translation with axis oriented p -> q; positive length moves
// points toward q. Zero length gives the identity.
inline MobiusMap translation_along_oriented(BoundaryPoint p, BoundaryPoint q, double length) {
    if (length == 0.0) return MobiusMap::identity();
    MobiusMap s = send_to_std(p, q);
    MobiusMap d;
    d.a = std::exp(length / 2.0);
    d.b = 0.0;
    d.c = 0.0;
    d.d = std::exp(-length / 2.0);
    return s.inverse() * d * s;
}

// Hyperbolic translation with axis g and translation length |w|. The
// canonical orientation runs from the smaller to the larger half-plane
// endpoint (infinity counting as largest), so for g = (0, infinity) and
// w = log 2 this is x -> 2x.
inline MobiusMap translation_along(const Geodesic& g, double w) {
    double xp = g.p.half_plane();
    double xq = g.q.half_plane();
    bool p_first = std::isinf(xq) || (!std::isinf(xp) && xp < xq);
    BoundaryPoint lo = p_first ? g.p : g.q;
    BoundaryPoint hi = p_first ? g.q : g.p;
    return translation_along_oriented(lo, hi, w);
}

// Translation length 2*arccosh(|tr|/2) of a hyperbolic map; 0 for the
// identity. Throws NonHyperbolicMap on elliptic/parabolic input.
inline double translation_length(const MobiusMap& m) {
    if (m.is_identity()) return 0.0;
    double det = m.det();
    double scale = det > 0.0 ? std::sqrt(det) : 1.0;
    double t = std::fabs(m.trace()) / scale;
    if (t <= 2.0)
        throw NonHyperbolicMap("translation_length: map is not hyperbolic (|trace| <= 2)");
    return 2.0 * std::acosh(t / 2.0);
}

// Repelling and attracting fixed points of a hyperbolic map. The map
// translates along its axis from repelling toward attracting.
struct AxisEndpoints {
    BoundaryPoint repelling, attracting;
};

inline AxisEndpoints hyperbolic_axis(const MobiusMap& m) {
    double det = m.det();
    double scale = det > 0.0 ? std::sqrt(det) : 1.0;
    double t = m.trace() / scale;
    if (std::fabs(t) <= 2.0)
        throw NonHyperbolicMap("hyperbolic_axis: map is not hyperbolic");
    // Fixed points solve c x^2 + (d - a) x - b = 0; use the
    // cancellation-free quadratic formula with the discriminant taken from
    // the quadratic's own coefficients (robust to determinant drift).
    const double inf = std::numeric_limits<double>::infinity();
    double A = m.c, B = m.d - m.a, C = -m.b;
    double x1, x2;
    if (A == 0.0) {
        x1 = inf;
        x2 = (B == 0.0) ? inf : -C / B;
    } else {
        double disc = std::sqrt(B * B - 4.0 * A * C);
        double qf = -(B + std::copysign(disc, B)) / 2.0;
        if (qf == 0.0) {
            x1 = 0.0;
            x2 = -B / A;
        } else {
            x1 = qf / A;
            x2 = C / qf;
        }
    }
    // |derivative| at a finite fixed point x is det/(c x + d)^2; the map
    // attracts where it is < 1. Exactly one fixed point attracts.
    auto attracts = [&](double x) {
        if (std::isinf(x)) return false; // decided by the finite one
        double den = m.c * x + m.d;
        return den * den > det;
    };
    AxisEndpoints ax;
    bool x1_attracts = std::isinf(x1) ? !attracts(x2) : attracts(x1);
    if (x1_attracts) {
        ax.attracting = BoundaryPoint::from_half_plane(x1);
        ax.repelling = BoundaryPoint::from_half_plane(x2);
    } else {
        ax.attracting = BoundaryPoint::from_half_plane(x2);
        ax.repelling = BoundaryPoint::from_half_plane(x1);
    }
    return ax;
}

// Mobius map through three boundary points: p1 -> q1, p2 -> q2, p3 -> q3.
// Both triples must be in counterclockwise order (the resulting matrix must
// be orientation preserving).
namespace detail {
// Matrix sending (p, r, q) to (0, 1, infinity), allowing infinities.
inline std::array<double, 4> to_zero_one_inf(double p, double r, double q) {
    if (std::isinf(p)) return {0.0, r - q, 1.0, -q};
    if (std::isinf(r)) return {1.0, -p, 1.0, -q};
    if (std::isinf(q)) return {1.0, -p, 0.0, r - p};
    return {r - q, -p * (r - q), r - p, -q * (r - p)};
}
} // namespace detail

inline MobiusMap mobius_through(BoundaryPoint p1, BoundaryPoint q1, BoundaryPoint p2,
                                BoundaryPoint q2, BoundaryPoint p3, BoundaryPoint q3) {
    auto build = [](double x1, double x2, double x3) {
        auto e = detail::to_zero_one_inf(x1, x2, x3);
        double det = e[0] * e[3] - e[1] * e[2];
        if (det == 0.0) throw DegenerateInput("mobius_through: coincident points");
        if (det < 0.0) { e[0] = -e[0]; e[1] = -e[1]; }
        return e;
    };
    auto s = build(p1.half_plane(), p2.half_plane(), p3.half_plane());
    auto t = build(q1.half_plane(), q2.half_plane(), q3.half_plane());
    // result = t^{-1} * s (as projective matrices)
    std::array<double, 4> ti{t[3], -t[1], -t[2], t[0]};
    return MobiusMap::from_entries(ti[0] * s[0] + ti[1] * s[2], ti[0] * s[1] + ti[1] * s[3],
                                   ti[2] * s[0] + ti[3] * s[2], ti[2] * s[1] + ti[3] * s[3]);
}

// A box of geodesics: all geodesics with one endpoint in the arc (a,b) and
// the other in the arc (c,d), the four corners given in strict
// counterclockwise order.
struct GeodesicBox {
    BoundaryPoint a, b, c, d;

    GeodesicBox(BoundaryPoint a_, BoundaryPoint b_, BoundaryPoint c_, BoundaryPoint d_)
        : a(a_), b(b_), c(c_), d(d_) {
        double rb = ccw_from(a.angle, b.angle);
        double rc = ccw_from(a.angle, c.angle);
        double rd = ccw_from(a.angle, d.angle);
        if (!(rb > exact_tol && rc > rb + exact_tol && rd > rc + exact_tol &&
              rd < two_pi - exact_tol))
            throw DegenerateInput("GeodesicBox: corners must be distinct and counterclockwise");
    }

    // The box (-1,-i)x(1,i): corners at angles (pi, 3pi/2, 0, pi/2). This is
    // the domain of the standard box isometry and has Liouville mass log 2.
    static GeodesicBox reference() {
        return GeodesicBox(BoundaryPoint(M_PI), BoundaryPoint(1.5 * M_PI), BoundaryPoint(0.0),
                           BoundaryPoint(0.5 * M_PI));
    }

    // True iff g has one endpoint strictly inside (a,b) and the other
    // strictly inside (c,d).
    bool contains(const Geodesic& g) const {
        double u = g.p.angle, v = g.q.angle;
        auto in_ab = [&](double x) { return in_arc(x, a.angle, b.angle); };
        auto in_cd = [&](double x) { return in_arc(x, c.angle, d.angle); };
        return (in_ab(u) && in_cd(v)) || (in_ab(v) && in_cd(u));
    }

    std::array<double, 4> corner_angles() const { return {a.angle, b.angle, c.angle, d.angle}; }
};

inline GeodesicBox apply_box(const MobiusMap& m, const GeodesicBox& q) {
    return GeodesicBox(m.apply(q.a), m.apply(q.b), m.apply(q.c), m.apply(q.d));
}

} // namespace solquake
