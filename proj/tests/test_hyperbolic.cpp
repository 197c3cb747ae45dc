#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "solquake/hyperbolic.hpp"

using namespace solquake;
using testutil::Rng;

TEST_CASE("boundary point conversions round-trip") {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        BoundaryPoint p(testutil::uniform(rng, 0.0, two_pi));
        BoundaryPoint q = BoundaryPoint::from_half_plane(p.half_plane());
        REQUIRE(angle_dist(p.angle, q.angle) < 1e-12);
    }
    REQUIRE(std::isinf(BoundaryPoint(0.0).half_plane()));
    REQUIRE(BoundaryPoint(M_PI).half_plane() == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("mobius_apply basics") {
    BoundaryPoint p(half_pi);
    REQUIRE(angle_dist(MobiusMap::identity().apply(p).angle, half_pi) < 1e-15);

    // Rotation by pi/2 in the disk sends angle 0 to pi/2.
    MobiusMap rot = MobiusMap::rotation(half_pi);
    REQUIRE(angle_dist(rot.apply(BoundaryPoint(0.0)).angle, half_pi) < 1e-12);
}

TEST_CASE("mobius action agrees with the disk-native conjugated action") {
    Rng rng(12);
    for (int i = 0; i < 200; ++i) {
        MobiusMap m = testutil::random_mobius(rng);
        BoundaryPoint p(testutil::uniform(rng, 0.0, two_pi));
        // Disk-native path: conjugate by the Cayley matrices with complex
        // arithmetic and act by the fractional-linear formula.
        std::complex<double> K[4] = {{0, 1}, {0, 1}, {-1, 0}, {1, 0}};  // z -> i(1+z)/(1-z)
        std::complex<double> Ki[4] = {{1, 0}, {0, -1}, {1, 0}, {0, 1}}; // w -> (w-i)/(w+i)
        std::complex<double> M[4] = {{m.a, 0}, {m.b, 0}, {m.c, 0}, {m.d, 0}};
        auto mul = [](const std::complex<double>* x, const std::complex<double>* y,
                      std::complex<double>* r) {
            r[0] = x[0] * y[0] + x[1] * y[2];
            r[1] = x[0] * y[1] + x[1] * y[3];
            r[2] = x[2] * y[0] + x[3] * y[2];
            r[3] = x[2] * y[1] + x[3] * y[3];
        };
        std::complex<double> t[4], n[4];
        mul(M, K, t);
        mul(Ki, t, n);
        std::complex<double> z = p.unit();
        std::complex<double> image = (n[0] * z + n[1]) / (n[2] * z + n[3]);
        double expected = std::atan2(image.imag(), image.real());
        REQUIRE(angle_dist(m.apply(p).angle, expected) < 1e-10);
    }
}

TEST_CASE("composition acts associatively on the boundary") {
    Rng rng(13);
    for (int i = 0; i < 300; ++i) {
        MobiusMap m = testutil::random_mobius(rng);
        MobiusMap n = testutil::random_mobius(rng);
        BoundaryPoint p(testutil::uniform(rng, 0.0, two_pi));
        REQUIRE(angle_dist((m * n).apply(p).angle, m.apply(n.apply(p)).angle) < 1e-10);
    }
}

TEST_CASE("translation_along normal form and edge cases") {
    // g = (0, inf) in the half-plane is the geodesic with disk angles (pi, 0).
    Geodesic g(BoundaryPoint(M_PI), BoundaryPoint(0.0));
    MobiusMap t = translation_along(g, std::log(2.0));
    REQUIRE(t.apply_half(1.0) == Catch::Approx(2.0).epsilon(1e-12));
    REQUIRE(t.apply_half(-3.0) == Catch::Approx(-6.0).epsilon(1e-12));

    REQUIRE(translation_along(g, 0.0).is_identity());
}

TEST_CASE("translation_along conjugation identity") {
    Rng rng(14);
    for (int i = 0; i < 100; ++i) {
        auto angles = testutil::separated_angles(rng, 2, 1e-2);
        Geodesic g{BoundaryPoint(angles[0]), BoundaryPoint(angles[1])};
        double w = testutil::uniform(rng, -2.0, 2.0);
        MobiusMap m = testutil::random_mobius(rng);
        Geodesic mg(m.apply(g.p), m.apply(g.q));
        MobiusMap lhs = translation_along(mg, w);
        MobiusMap rhs = m * translation_along(g, w) * m.inverse();
        // Both are translations along m(g) of length |w|; orientation
        // conventions may flip the sign, so compare against the inverse too.
        double dist = std::min(mobius_dist(lhs, rhs), mobius_dist(lhs, rhs.inverse()));
        REQUIRE(dist < 1e-10);
    }
}

TEST_CASE("translation_length") {
    REQUIRE(translation_length(MobiusMap::identity()) == 0.0);
    Geodesic g(BoundaryPoint(M_PI), BoundaryPoint(0.0));
    MobiusMap doubling = translation_along(g, std::log(2.0));
    REQUIRE(translation_length(doubling) == Catch::Approx(std::log(2.0)).epsilon(1e-12));

    REQUIRE_THROWS_AS(translation_length(MobiusMap::rotation(0.3)), NonHyperbolicMap);

    Rng rng(15);
    for (int i = 0; i < 100; ++i) {
        auto angles = testutil::separated_angles(rng, 2, 1e-2);
        Geodesic axis{BoundaryPoint(angles[0]), BoundaryPoint(angles[1])};
        double w = testutil::uniform(rng, 0.01, 3.0);
        REQUIRE(translation_length(translation_along(axis, w)) ==
                Catch::Approx(w).margin(1e-10));
    }
}

TEST_CASE("hyperbolic_axis recovers the oriented axis") {
    Rng rng(16);
    for (int i = 0; i < 100; ++i) {
        auto angles = testutil::separated_angles(rng, 2, 1e-2);
        BoundaryPoint p(angles[0]), q(angles[1]);
        double w = testutil::uniform(rng, 0.05, 3.0);
        MobiusMap t = translation_along_oriented(p, q, w);
        AxisEndpoints ax = hyperbolic_axis(t);
        REQUIRE(angle_dist(ax.attracting.angle, q.angle) < 1e-9);
        REQUIRE(angle_dist(ax.repelling.angle, p.angle) < 1e-9);
    }
}

TEST_CASE("geodesics_cross") {
    auto G = [](double a, double b) { return Geodesic(BoundaryPoint(a), BoundaryPoint(b)); };
    REQUIRE(geodesics_cross(G(0, M_PI), G(half_pi, 3 * half_pi)));
    REQUIRE_FALSE(geodesics_cross(G(0, M_PI), G(M_PI / 4, half_pi)));
    REQUIRE_FALSE(geodesics_cross(G(0, M_PI), G(M_PI, 3 * half_pi))); // shared endpoint

    Rng rng(17);
    for (int i = 0; i < 200; ++i) {
        auto a = testutil::separated_angles(rng, 4, 1e-2);
        Geodesic g1{BoundaryPoint(a[0]), BoundaryPoint(a[1])};
        Geodesic g2{BoundaryPoint(a[2]), BoundaryPoint(a[3])};
        bool c = geodesics_cross(g1, g2);
        REQUIRE(c == geodesics_cross(g2, g1));
        MobiusMap m = testutil::random_mobius(rng);
        Geodesic h1(m.apply(g1.p), m.apply(g1.q));
        Geodesic h2(m.apply(g2.p), m.apply(g2.q));
        REQUIRE(c == geodesics_cross(h1, h2));
    }
}

TEST_CASE("separates examples and oracle") {
    // The geodesic with disk angles (0, pi) is the imaginary axis in the
    // half-plane; points on either side of it are separated.
    Geodesic g(BoundaryPoint(0.0), BoundaryPoint(M_PI));
    Complex left = half_to_disk(Complex(-0.3, 0.5));
    Complex right = half_to_disk(Complex(0.3, 0.5));
    REQUIRE(separates(g, left, right));
    REQUIRE_FALSE(separates(g, left, left));

    Complex on_axis = half_to_disk(Complex(0.0, 0.7));
    REQUIRE_THROWS_AS(separates(g, on_axis, right), PointOnGeodesic);

    Rng rng(18);
    for (int i = 0; i < 500; ++i) {
        auto a = testutil::separated_angles(rng, 2, 1e-2);
        Geodesic axis{BoundaryPoint(a[0]), BoundaryPoint(a[1])};
        Complex z = testutil::random_disk_point(rng);
        Complex w = testutil::random_disk_point(rng);
        int sz = testutil::side_oracle(axis, z);
        int sw = testutil::side_oracle(axis, w);
        if (sz == 0 || sw == 0) continue;
        REQUIRE(separates(axis, z, w) == (sz != sw));
    }
}

TEST_CASE("hyp_dist") {
    REQUIRE(hyp_dist(Complex(0.1, 0.2), Complex(0.1, 0.2)) == 0.0);
    double r = (std::exp(1.0) - 1.0) / (std::exp(1.0) + 1.0);
    REQUIRE(hyp_dist(Complex(0, 0), Complex(r, 0)) == Catch::Approx(1.0).epsilon(1e-12));

    Rng rng(19);
    for (int i = 0; i < 1000; ++i) {
        Complex p = testutil::random_disk_point(rng);
        Complex q = testutil::random_disk_point(rng);
        MobiusMap m = testutil::random_mobius(rng);
        REQUIRE(hyp_dist(m.apply_disk(p), m.apply_disk(q)) ==
                Catch::Approx(hyp_dist(p, q)).margin(1e-10));
    }
}

TEST_CASE("mobius_through maps triples") {
    Rng rng(20);
    for (int i = 0; i < 200; ++i) {
        auto s = testutil::separated_angles(rng, 3, 1e-2);
        auto t = testutil::separated_angles(rng, 3, 1e-2);
        std::sort(s.begin(), s.end());
        std::sort(t.begin(), t.end());
        MobiusMap m = mobius_through(BoundaryPoint(s[0]), BoundaryPoint(t[0]),
                                     BoundaryPoint(s[1]), BoundaryPoint(t[1]),
                                     BoundaryPoint(s[2]), BoundaryPoint(t[2]));
        for (int k = 0; k < 3; ++k)
            REQUIRE(angle_dist(m.apply(BoundaryPoint(s[k])).angle, t[k]) < 1e-9);
    }
}

TEST_CASE("geodesic box validation") {
    REQUIRE_THROWS_AS(GeodesicBox(BoundaryPoint(0.0), BoundaryPoint(2.0), BoundaryPoint(1.0),
                                  BoundaryPoint(3.0)),
                      DegenerateInput);
    GeodesicBox ref = GeodesicBox::reference();
    REQUIRE(ref.contains(Geodesic(BoundaryPoint(1.2 * M_PI), BoundaryPoint(0.2))));
    REQUIRE_FALSE(ref.contains(Geodesic(BoundaryPoint(1.2 * M_PI), BoundaryPoint(1.4 * M_PI))));
}
