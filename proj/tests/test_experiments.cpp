#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "solquake/experiments.hpp"

using namespace solquake;
using testutil::Rng;

namespace {

GeodesicBox box_of(double a, double b, double c, double d) {
    return GeodesicBox(BoundaryPoint(a), BoundaryPoint(b), BoundaryPoint(c), BoundaryPoint(d));
}

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g;
    for (int i = 0; i < n; ++i)
        g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    return g;
}

} // namespace

TEST_CASE("thurston_ray on the empty lamination is exactly L(Q)/t") {
    GeodesicBox q = box_of(0.3, 1.2, 3.3, 4.8);
    std::vector<double> grid{1.0, 2.0, 5.0, 10.0, 25.0, 50.0};
    ConvergenceReport r = thurston_ray(MeasuredLamination{}, grid, {q});
    double lq = liouville_box(q);
    for (std::size_t i = 0; i < grid.size(); ++i)
        REQUIRE(r.table.rows[i][2] == lq / grid[i]);
    REQUIRE(r.passed());
}

TEST_CASE("thurston_ray single atom matches the closed-form oracle") {
    // Atom with weight 1 and a box around it with separated corners. The
    // normalization anchors (angles 0, pi/2, pi) lie in the base gap, so
    // the normalized path keeps the base stratum asymptotically fixed.
    double p = 3.5, q = 5.5;
    MeasuredLamination lam{{{Geodesic(BoundaryPoint(p), BoundaryPoint(q)), 1.0}}};
    GeodesicBox box = box_of(p - 0.7, p + 0.7, q - 0.7, q + 0.7);
    std::vector<double> grid{1.0, 2.0, 5.0, 10.0, 20.0, 50.0};
    ThurstonRayOptions opts;
    opts.base = off_fault_base(lam);
    ConvergenceReport r = thurston_ray(lam, grid, {box}, opts);
    REQUIRE(r.passed());
    double final_value = r.table.rows.back()[2];
    REQUIRE(std::fabs(final_value - 1.0) <= 0.05);

    // Closed-form oracle: two-piece map built directly, corners inverted by
    // hand, three-point normalization.
    BoundaryPoint bp(p), bq(q);
    bool base_left = signed_side(bp, bq, opts.base) < 0.0;
    BoundaryPoint tail = base_left ? bp : bq;
    BoundaryPoint head = base_left ? bq : bp;
    // Work in the frame sending the atom to (0, infinity), where the far
    // piece is exactly x -> e^t x and the thin cross-ratio factor is an
    // exact product.
    MobiusMap std_frame = send_to_std(tail, head);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double t = grid[i];
        MobiusMap trans = translation_along_oriented(tail, head, t);
        auto raw = [&](double angle) {
            bool far = in_arc(angle, tail.angle, head.angle);
            return far ? trans.apply(BoundaryPoint(angle)) : BoundaryPoint(angle);
        };
        MobiusMap norm = mobius_through(raw(0.0), BoundaryPoint(0.0), raw(half_pi),
                                        BoundaryPoint(half_pi), raw(M_PI), BoundaryPoint(M_PI));
        MobiusMap norm_inv = norm.inverse();
        std::array<double, 4> corners = box.corner_angles();
        std::array<double, 4> coord;  // standardized half-plane coordinate
        std::array<bool, 4> far_side;
        for (int k = 0; k < 4; ++k) {
            BoundaryPoint y = norm_inv.apply(BoundaryPoint(corners[k]));
            far_side[k] = in_arc(y.angle, tail.angle, head.angle);
            coord[k] = std_frame.apply(y).half_plane();
            REQUIRE(std::isfinite(coord[k]));
        }
        // In this frame the far side is x > 0 and inverting scales by
        // e^{-t}; differences of two far-side preimages factor exactly.
        auto factor = [&](int u, int v) {
            if (far_side[u] && far_side[v])
                return std::exp(-t) * std::fabs(coord[u] - coord[v]);
            double xu = far_side[u] ? std::exp(-t) * coord[u] : coord[u];
            double xv = far_side[v] ? std::exp(-t) * coord[v] : coord[v];
            return std::fabs(xu - xv);
        };
        double oracle =
            std::log(factor(0, 2) * factor(1, 3) / (factor(0, 3) * factor(1, 2))) / t;
        REQUIRE(r.table.rows[i][2] == Catch::Approx(oracle).margin(1e-9));
    }
}

TEST_CASE("thurston_ray decays on boxes away from the support") {
    double p = 3.5, q = 5.5;
    MeasuredLamination lam{{{Geodesic(BoundaryPoint(p), BoundaryPoint(q)), 1.0}}};
    GeodesicBox away = box_of(3.7, 4.1, 4.5, 4.9); // both arcs inside (p, q)
    REQUIRE(box_mass(lam, away) == 0.0);
    ThurstonRayOptions opts;
    opts.base = off_fault_base(lam);
    ConvergenceReport r = thurston_ray(lam, {1.0, 5.0, 25.0, 125.0}, {away}, opts);
    REQUIRE(r.passed()); // decays below 0.1x initial
}

TEST_CASE("prop31: constant sequence and converging families") {
    Rng rng(61);
    MeasuredLamination limit = testutil::random_lamination(rng, 4, 5e-2, 0.2, 1.0);
    std::vector<GeodesicBox> boxes = standard_box_family({&limit});
    if (boxes.size() > 12) boxes.erase(boxes.begin() + 12, boxes.end());
    std::vector<double> points{0.4, 1.3, 2.2, 3.1, 4.0, 5.2};

    std::vector<MeasuredLamination> constant(5, limit);
    ConvergenceReport rc = prop31_experiment(constant, limit, boxes, points);
    REQUIRE(rc.passed());
    for (const auto& row : rc.table.rows) {
        REQUIRE(row[1] == 0.0);
        REQUIRE(row[2] <= 1e-11);
    }

    // Weights ramping 1 + 1/n on a fixed atom: both indicators ~ 1/n.
    Geodesic g{BoundaryPoint(1.0), BoundaryPoint(4.2)};
    MeasuredLamination wlimit{{{g, 1.0}}};
    std::vector<MeasuredLamination> ramp;
    for (int n = 1; n <= 12; ++n)
        ramp.push_back(MeasuredLamination{{{g, 1.0 + 1.0 / n}}});
    std::vector<GeodesicBox> wboxes = standard_box_family({&wlimit});
    if (wboxes.size() > 12) wboxes.erase(wboxes.begin() + 12, wboxes.end());
    ConvergenceReport rw = prop31_experiment(ramp, wlimit, wboxes, points);
    REQUIRE(rw.passed());
    // rate ~ 1/n on the box masses for boxes containing the atom
    double first_gap = rw.table.rows.front()[1];
    double last_gap = rw.table.rows.back()[1];
    REQUIRE(first_gap == Catch::Approx(1.0));
    REQUIRE(last_gap == Catch::Approx(1.0 / 12.0));

    // Endpoints approaching a limit atom with equal weights.
    std::vector<MeasuredLamination> approach;
    for (int n = 1; n <= 10; ++n)
        approach.push_back(
            MeasuredLamination{{{Geodesic(BoundaryPoint(1.0), BoundaryPoint(4.2 + std::pow(0.5, n))),
                                 1.0}}});
    ConvergenceReport ra = prop31_experiment(approach, wlimit, wboxes, points);
    REQUIRE(ra.passed());
}

TEST_CASE("prop32: identical sequence, single-atom weights, and round trips") {
    Geodesic g{BoundaryPoint(0.9), BoundaryPoint(3.8)};
    MeasuredLamination limit{{{g, 1.0}}};
    PiecewiseMobiusCircleMap h_limit = earthquake_path(limit, 1.0, off_fault_base(limit));
    std::vector<double> nus{1.0, 0.5, 0.25};

    // seq = limit: everything at the numerical floor.
    ConvergenceReport same = prop32_experiment({h_limit, h_limit}, h_limit, nus);
    REQUIRE(same.passed());
    for (const auto& row : same.table.rows) {
        REQUIRE(row[1] < 1e-9);
        for (std::size_t c = 2; c < row.size(); ++c) REQUIRE(row[c] < 1e-9);
    }

    // w_n = 1 + 2^{-n}: distortion and upper brackets fall by 10x.
    std::vector<PiecewiseMobiusCircleMap> seq;
    for (int n = 1; n <= 8; ++n) {
        MeasuredLamination lam{{{g, 1.0 + std::pow(0.5, n)}}};
        seq.push_back(earthquake_path(lam, 1.0, off_fault_base(lam)));
    }
    ConvergenceReport r = prop32_experiment(seq, h_limit, nus);
    REQUIRE(r.passed());

    // Rebuild-from-recovery round trip: indicators at the numerical floor.
    MeasuredLamination rec = recover_measure(h_limit);
    PiecewiseMobiusCircleMap rebuilt = earthquake_path(rec, 1.0, off_fault_base(rec));
    ConvergenceReport rt = prop32_experiment({rebuilt}, h_limit, nus);
    for (const auto& row : rt.table.rows)
        for (std::size_t c = 1; c < row.size(); ++c) REQUIRE(row[c] <= 1e-9);
}

TEST_CASE("converse counterexample") {
    std::vector<double> gaps;
    for (int k = 1; k <= 10; ++k) gaps.push_back(std::pow(0.5, k));
    ConvergenceReport r = converse_counterexample(1.0, gaps);
    REQUIRE(r.passed());
    // Frechet upper bracket decreasing toward 0, distortion stays put.
    REQUIRE(r.table.rows.back()[1] * 10.0 <= r.table.rows.front()[1]);
    double first_dist = r.table.rows.front()[3];
    double last_dist = r.table.rows.back()[3];
    REQUIRE(last_dist > 0.25 * first_dist);

    // gap = 0 gives identically zero indicators.
    ConvergenceReport z = converse_counterexample(1.0, {0.0});
    REQUIRE(z.table.rows[0][1] == 0.0);
    REQUIRE(z.table.rows[0][3] < 1e-9);

    // Homogeneity: doubling the weight doubles the Frechet brackets exactly.
    ConvergenceReport r2 = converse_counterexample(2.0, {0.25, 0.125});
    ConvergenceReport r1 = converse_counterexample(1.0, {0.25, 0.125});
    for (std::size_t i = 0; i < r1.table.rows.size(); ++i) {
        REQUIRE(r2.table.rows[i][1] == Catch::Approx(2.0 * r1.table.rows[i][1]).epsilon(1e-12));
        REQUIRE(r2.table.rows[i][2] == Catch::Approx(2.0 * r1.table.rows[i][2]).epsilon(1e-12));
    }
}

TEST_CASE("tlc_density_experiment") {
    PuncturedTorusRep rep;
    auto chain = std::make_shared<const CoreChain>(CoreChain::canonical(3));
    auto space = std::make_shared<const TransversalSpace>(TransversalSpace::build(chain, 3));

    // Transversely constant family: distance 0 at every depth.
    LeafwiseLamination constant = tlc_lift(rep, {{GroupWord::parse("a"), 1.0}}, 1, space);
    ConvergenceReport rc = tlc_density_experiment(constant, {1, 2, 3});
    REQUIRE(rc.passed());
    for (const auto& row : rc.table.rows) REQUIRE(row[1] == 0.0);

    // Two-seed family with m_i = 2^{-i}: decreasing and within tail bounds.
    LeafwiseLamination fam = two_seed_family(rep, GroupWord::parse("a"), GroupWord::parse("b"),
                                             {0.5, 0.25}, 3, space);
    TlcDensityOptions opts;
    double weight_sum = 0.0;
    for (int n = 1; n <= opts.n_max; ++n) weight_sum += 1.0 / (static_cast<double>(n) * n);
    // At depth n the approximation differs only at levels >= n, each leaf
    // holding at most one atom of mass <= 2^{-n}.
    opts.tail_bounds = {weight_sum * 2.0 * 0.5, weight_sum * 2.0 * 0.25, 0.0};
    ConvergenceReport r = tlc_density_experiment(fam, {1, 2, 3}, opts);
    REQUIRE(r.passed());
    REQUIRE(r.table.rows[0][1] > r.table.rows[1][1]);
    REQUIRE(r.table.rows[2][1] == 0.0);
}

TEST_CASE("experiments are deterministic") {
    Geodesic g{BoundaryPoint(0.9), BoundaryPoint(3.8)};
    MeasuredLamination lam{{{g, 1.0}}};
    GeodesicBox box = box_of(0.4, 1.4, 3.3, 4.3);
    ThurstonRayOptions opts;
    opts.base = off_fault_base(lam);
    ConvergenceReport a = thurston_ray(lam, {1.0, 4.0, 16.0}, {box}, opts);
    ConvergenceReport b = thurston_ray(lam, {1.0, 4.0, 16.0}, {box}, opts);
    REQUIRE(a.table.csv() == b.table.csv());

    std::vector<double> gaps{0.5, 0.25, 0.125};
    REQUIRE(converse_counterexample(1.0, gaps).table.csv() ==
            converse_counterexample(1.0, gaps).table.csv());

    // Parallel evaluation assembles the same table.
    ThurstonRayOptions par = opts;
    par.jobs = 4;
    REQUIRE(thurston_ray(lam, {1.0, 4.0, 16.0}, {box}, par).table.csv() == a.table.csv());
}
