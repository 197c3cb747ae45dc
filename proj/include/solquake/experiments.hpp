#pragma once

// Desk-scale convergence experiments: the Thurston-ray asymptotics of the
// Liouville pullback along earthquake paths, weak*/pointwise convergence,
// the quasisymmetric-to-Frechet direction, the shared-endpoint
// counterexample to its converse, and density of transversely constant
// families. Every experiment is deterministic given its inputs and seed
// and reports a flat table plus named pass/fail assertions.

#include <cstdio>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "solquake/earthquake.hpp"
#include "solquake/liouville.hpp"
#include "solquake/solenoid.hpp"

namespace solquake {

struct Assertion {
    std::string name;
    bool passed;
    std::string detail;
};

struct FlatTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::string csv() const {
        std::string out;
        for (std::size_t c = 0; c < columns.size(); ++c) {
            out += columns[c];
            out += (c + 1 < columns.size()) ? ',' : '\n';
        }
        char buf[64];
        for (const auto& row : rows)
            for (std::size_t c = 0; c < row.size(); ++c) {
                std::snprintf(buf, sizeof buf, "%.17g", row[c]);
                out += buf;
                out += (c + 1 < row.size()) ? ',' : '\n';
            }
        return out;
    }
};

struct ConvergenceReport {
    std::string experiment;
    std::vector<std::pair<std::string, std::string>> metadata;
    FlatTable table;
    std::vector<Assertion> assertions;

    bool passed() const {
        for (const auto& a : assertions)
            if (!a.passed) return false;
        return true;
    }

    void note(const std::string& key, const std::string& value) {
        metadata.emplace_back(key, value);
    }
    void assert_that(const std::string& name, bool ok, const std::string& detail) {
        assertions.push_back({name, ok, detail});
    }
};

// Ordered parallel map; results are assembled by index so the output is
// independent of the worker count.
template <class F>
inline void parallel_for(std::size_t n, int jobs, F&& body) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::size_t workers = std::min<std::size_t>(jobs, n);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) body(i);
        });
    for (auto& t : pool) t.join();
}

namespace detail {

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void require_increasing(const std::vector<double>& grid, const char* what) {
    if (grid.empty()) throw DegenerateInput(std::string(what) + ": empty grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw DegenerateInput(std::string(what) + ": grid must be strictly increasing");
}

// final <= ratio * initial (or already at the floor).
inline bool improving(double initial, double final_value, double ratio, double floor = 1e-12) {
    return final_value <= ratio * initial + floor;
}

} // namespace detail

// --- Thurston ray ---------------------------------------------------------------

struct ThurstonRayOptions {
    Complex base{0.0, 0.0};
    double final_rel_tol = 0.05; // |value(t_max)/mass - 1| for boxes with mass
    double zero_ratio = 0.1;     // decay required for mass-zero boxes
    int jobs = 1;
};

// Records (1/t) (h_t)_* L (Q) along the earthquake path of the lamination
// and compares the largest-t value with the box mass.
inline ConvergenceReport thurston_ray(const MeasuredLamination& lam,
                                      const std::vector<double>& t_grid,
                                      const std::vector<GeodesicBox>& boxes,
                                      const ThurstonRayOptions& opts = {}) {
    detail::require_increasing(t_grid, "thurston_ray");
    if (boxes.empty()) throw DegenerateInput("thurston_ray: no boxes");
    ConvergenceReport report;
    report.experiment = "thurston-ray";
    report.note("atoms", std::to_string(lam.size()));
    report.table.columns = {"t", "box", "value", "box_mass"};

    std::vector<double> masses(boxes.size());
    for (std::size_t q = 0; q < boxes.size(); ++q) {
        try {
            masses[q] = box_mass(lam, boxes[q]);
        } catch (const BoxCornerCollision&) {
            throw BoxCornerCollision("thurston_ray: box " + std::to_string(q) +
                                     " has a corner on an atom endpoint");
        }
    }

    std::vector<std::vector<double>> values(t_grid.size(),
                                            std::vector<double>(boxes.size(), 0.0));
    parallel_for(t_grid.size(), opts.jobs, [&](std::size_t i) {
        PiecewiseMobiusCircleMap h = earthquake_path(lam, t_grid[i], opts.base);
        for (std::size_t q = 0; q < boxes.size(); ++q)
            values[i][q] = pullback_liouville(h, boxes[q]) / t_grid[i];
    });
    for (std::size_t i = 0; i < t_grid.size(); ++i)
        for (std::size_t q = 0; q < boxes.size(); ++q)
            report.table.rows.push_back({t_grid[i], static_cast<double>(q), values[i][q],
                                         masses[q]});

    for (std::size_t q = 0; q < boxes.size(); ++q) {
        double last = values.back()[q];
        if (masses[q] > 0.0) {
            double rel = std::fabs(last / masses[q] - 1.0);
            report.assert_that("box" + std::to_string(q) + "_converges_to_mass",
                               rel <= opts.final_rel_tol,
                               "relative gap " + detail::fmt(rel));
        } else {
            report.assert_that("box" + std::to_string(q) + "_decays",
                               detail::improving(values.front()[q], last, opts.zero_ratio),
                               "final " + detail::fmt(last));
        }
    }
    return report;
}

// --- weak* versus pointwise (Proposition 3.1 direction) -------------------------

struct Prop31Options {
    double improve_ratio = 0.5;
    double floor = 1e-11;
};

inline ConvergenceReport prop31_experiment(const std::vector<MeasuredLamination>& seq,
                                           const MeasuredLamination& limit,
                                           const std::vector<GeodesicBox>& boxes,
                                           const std::vector<double>& points,
                                           const Prop31Options& opts = {}) {
    if (seq.empty()) throw DegenerateInput("prop31: empty sequence");
    if (boxes.empty() || points.empty()) throw DegenerateInput("prop31: need boxes and points");
    ConvergenceReport report;
    report.experiment = "prop31";
    report.table.columns = {"index", "box_gap", "point_gap"};

    PiecewiseMobiusCircleMap h_limit = earthquake_path(limit, 1.0, off_fault_base(limit));
    std::vector<double> box_gaps, point_gaps;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        double bg = 0.0;
        for (const auto& q : boxes)
            bg = std::max(bg, std::fabs(box_mass(seq[i], q) - box_mass(limit, q)));
        PiecewiseMobiusCircleMap h = earthquake_path(seq[i], 1.0, off_fault_base(seq[i]));
        double pg = 0.0;
        for (double x : points)
            pg = std::max(pg, angle_dist(h.apply(BoundaryPoint(x)).angle,
                                         h_limit.apply(BoundaryPoint(x)).angle));
        box_gaps.push_back(bg);
        point_gaps.push_back(pg);
        report.table.rows.push_back({static_cast<double>(i + 1), bg, pg});
    }
    bool box_improving =
        detail::improving(box_gaps.front(), box_gaps.back(), opts.improve_ratio, opts.floor);
    bool point_improving =
        detail::improving(point_gaps.front(), point_gaps.back(), opts.improve_ratio, opts.floor);
    report.note("box_improving", box_improving ? "yes" : "no");
    report.note("point_improving", point_improving ? "yes" : "no");
    report.assert_that("indicators_agree", box_improving == point_improving,
                       std::string("box ") + (box_improving ? "improving" : "stalled") +
                           ", pointwise " + (point_improving ? "improving" : "stalled"));
    return report;
}

// --- quasisymmetric to Frechet (Proposition 3.2 direction) ----------------------

struct Prop32Options {
    double improve_ratio = 0.1;
    int budget = 512;
    std::uint64_t seed = 0;
};

inline ConvergenceReport prop32_experiment(const std::vector<PiecewiseMobiusCircleMap>& seq,
                                           const PiecewiseMobiusCircleMap& limit,
                                           const std::vector<double>& nu_list,
                                           const Prop32Options& opts = {}) {
    if (seq.empty() || nu_list.empty()) throw DegenerateInput("prop32: empty input");
    ConvergenceReport report;
    report.experiment = "prop32";
    report.table.columns = {"index", "distortion"};
    for (double nu : nu_list) {
        report.table.columns.push_back("upper_nu_" + detail::fmt(nu));
        report.table.columns.push_back("lower_nu_" + detail::fmt(nu));
    }

    MeasuredLamination rec_limit = recover_measure(limit);
    PiecewiseMobiusCircleMap limit_inv = limit.inverse();
    std::vector<double> distortions;
    std::vector<std::vector<double>> uppers(nu_list.size());
    for (std::size_t i = 0; i < seq.size(); ++i) {
        MeasuredLamination rec = recover_measure(seq[i]);
        std::vector<GeodesicBox> family = standard_box_family({&rec, &rec_limit});
        double dist = qs_distortion(compose(seq[i], limit_inv), family);
        distortions.push_back(dist);
        std::vector<double> row{static_cast<double>(i + 1), dist};
        for (std::size_t n = 0; n < nu_list.size(); ++n) {
            HolderNormBracket b =
                nu_norm_diff(rec, rec_limit, nu_list[n], opts.budget, opts.seed);
            uppers[n].push_back(b.upper);
            row.push_back(b.upper);
            row.push_back(b.lower);
        }
        report.table.rows.push_back(std::move(row));
    }

    bool dist_improving =
        detail::improving(distortions.front(), distortions.back(), opts.improve_ratio);
    report.note("distortion_improving", dist_improving ? "yes" : "no");
    report.assert_that("distortion_improves", dist_improving,
                       "first " + detail::fmt(distortions.front()) + " last " +
                           detail::fmt(distortions.back()));
    for (std::size_t n = 0; n < nu_list.size(); ++n) {
        bool ok = !dist_improving || detail::improving(uppers[n].front(), uppers[n].back(),
                                                       opts.improve_ratio);
        report.assert_that("upper_bracket_improves_nu_" + detail::fmt(nu_list[n]), ok,
                           "first " + detail::fmt(uppers[n].front()) + " last " +
                               detail::fmt(uppers[n].back()));
    }
    return report;
}

// --- the converse fails (shared-endpoint family) --------------------------------

struct ConverseOptions {
    double shared_endpoint = M_PI; // p
    double limit_endpoint = 0.0;   // q; the moving atom is (p, q + gap)
    int n_max = 8;
    int budget = 512;
    std::uint64_t seed = 0;
    double frechet_ratio = 10.0;  // required decay of the Frechet upper bound
    double stability = 0.2;       // distortion floor stays within this of the median
};

inline ConvergenceReport converse_counterexample(double weight,
                                                 const std::vector<double>& gap_grid,
                                                 const ConverseOptions& opts = {}) {
    if (!(weight > 0.0)) throw DegenerateInput("converse: weight must be positive");
    if (gap_grid.empty()) throw DegenerateInput("converse: empty gap grid");
    ConvergenceReport report;
    report.experiment = "converse";
    report.table.columns = {"gap", "frechet_upper", "frechet_mid", "distortion"};

    Geodesic fixed(BoundaryPoint(opts.shared_endpoint), BoundaryPoint(opts.limit_endpoint));
    MeasuredLamination limit{{{fixed, weight}}};
    PiecewiseMobiusCircleMap h_limit = earthquake_path(limit, 1.0, off_fault_base(limit));
    PiecewiseMobiusCircleMap h_limit_inv = h_limit.inverse();

    std::vector<double> frech_uppers, distortions;
    for (double gap : gap_grid) {
        MeasuredLamination moved;
        if (gap == 0.0) {
            moved = limit;
        } else {
            moved.atoms.push_back(
                {Geodesic(BoundaryPoint(opts.shared_endpoint),
                          BoundaryPoint(opts.limit_endpoint + gap)),
                 weight});
        }
        double fu = frechet_dist_upper(moved, limit, opts.n_max, opts.budget, opts.seed);
        double fm = frechet_dist(moved, limit, opts.n_max, opts.budget, opts.seed);
        PiecewiseMobiusCircleMap h = earthquake_path(moved, 1.0, off_fault_base(moved));
        std::vector<GeodesicBox> family = standard_box_family({&moved, &limit});
        double dist = qs_distortion(compose(h, h_limit_inv), family);
        frech_uppers.push_back(fu);
        distortions.push_back(dist);
        report.table.rows.push_back({gap, fu, fm, dist});
    }

    report.assert_that(
        "frechet_upper_decays",
        frech_uppers.back() * opts.frechet_ratio <= frech_uppers.front() + 1e-15,
        "first " + detail::fmt(frech_uppers.front()) + " last " +
            detail::fmt(frech_uppers.back()));

    std::vector<double> sorted = distortions;
    std::sort(sorted.begin(), sorted.end());
    double median = sorted[sorted.size() / 2];
    bool stable = true;
    for (double d : distortions)
        if (std::fabs(d - median) > opts.stability * median) stable = false;
    report.note("distortion_median", detail::fmt(median));
    report.assert_that("distortion_floor_stable", stable && median > 0.0,
                       "median " + detail::fmt(median));
    return report;
}

// --- TLC density ------------------------------------------------------------------

struct TlcDensityOptions {
    int n_max = 8;
    int budget = 128;
    std::uint64_t seed = 0;
    // Optional per-depth upper bounds (e.g. tail masses); checked when given.
    std::vector<double> tail_bounds;
};

// For each depth n, replaces the family on every depth-n coset class by
// the value at the class representative and records the worst Frechet
// distance to the original family.
inline ConvergenceReport tlc_density_experiment(const LeafwiseLamination& fam,
                                                const std::vector<int>& depth_grid,
                                                const TlcDensityOptions& opts = {}) {
    if (depth_grid.empty()) throw DegenerateInput("tlc_density: empty depth grid");
    for (std::size_t i = 1; i < depth_grid.size(); ++i)
        if (depth_grid[i] <= depth_grid[i - 1])
            throw DegenerateInput("tlc_density: depth grid must increase");
    ConvergenceReport report;
    report.experiment = "tlc-density";
    report.table.columns = {"depth", "max_frechet", "tail_bound"};

    const TransversalSpace& space = *fam.space;
    std::vector<double> worsts;
    for (std::size_t gi = 0; gi < depth_grid.size(); ++gi) {
        int n = depth_grid[gi];
        if (n < 1 || n > space.depth)
            throw DegenerateInput("tlc_density: depth outside the transversal");
        TransversalSpace coarse = TransversalSpace::build(space.chain, n);
        // Representative full-space coset per coarse class.
        std::map<int, int> class_rep;
        for (std::size_t t = 0; t < space.size(); ++t) {
            int cls = coarse.coset_of(space.reps[t]);
            class_rep.emplace(cls, static_cast<int>(t));
        }
        double worst = 0.0;
        std::map<std::pair<int, int>, double> cache;
        for (std::size_t t = 0; t < space.size(); ++t) {
            int rep_coset = class_rep.at(coarse.coset_of(space.reps[t]));
            std::pair<int, int> key{std::min(fam.assignment[t], fam.assignment[rep_coset]),
                                    std::max(fam.assignment[t], fam.assignment[rep_coset])};
            auto it = cache.find(key);
            if (it == cache.end())
                it = cache
                         .emplace(key, frechet_dist(fam.at(static_cast<int>(t)),
                                                    fam.at(rep_coset), opts.n_max, opts.budget,
                                                    opts.seed))
                         .first;
            worst = std::max(worst, it->second);
        }
        worsts.push_back(worst);
        double bound = gi < opts.tail_bounds.size() ? opts.tail_bounds[gi] : -1.0;
        report.table.rows.push_back({static_cast<double>(n), worst, bound});
        if (bound >= 0.0)
            report.assert_that("depth" + std::to_string(n) + "_within_tail_bound",
                               worst <= bound + 1e-12,
                               "max " + detail::fmt(worst) + " bound " + detail::fmt(bound));
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < worsts.size(); ++i)
        if (worsts[i] > worsts[i - 1] + 1e-12) decreasing = false;
    report.assert_that("max_frechet_decreases", decreasing,
                       "values " + [&] {
                           std::string s;
                           for (double w : worsts) s += detail::fmt(w) + std::string(" ");
                           return s;
                       }());
    return report;
}

} // namespace solquake
