#pragma once

// Shared generators and independent oracles for the test suites. Oracles
// deliberately avoid the library code paths they check.

#include <cmath>
#include <random>
#include <vector>

#include "solquake/earthquake.hpp"
#include "solquake/hyperbolic.hpp"
#include "solquake/lamination.hpp"

namespace testutil {

using namespace solquake;

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline MobiusMap random_mobius(Rng& rng) {
    // rotation * push * rotation gives a generic element of PSL(2,R).
    return MobiusMap::rotation(uniform(rng, 0.0, two_pi)) *
           translation_along_oriented(BoundaryPoint(M_PI), BoundaryPoint(0.0),
                                      uniform(rng, -1.5, 1.5)) *
           MobiusMap::rotation(uniform(rng, 0.0, two_pi));
}

inline Complex random_disk_point(Rng& rng, double rmax = 0.9) {
    double r = rmax * std::sqrt(uniform(rng, 0.0, 1.0));
    return std::polar(r, uniform(rng, 0.0, two_pi));
}

// 2n angles with all pairwise circular gaps >= min_sep.
inline std::vector<double> separated_angles(Rng& rng, int count, double min_sep) {
    for (int tries = 0; tries < 4000; ++tries) {
        std::vector<double> a;
        a.reserve(count);
        for (int i = 0; i < count; ++i) a.push_back(uniform(rng, 0.0, two_pi));
        std::vector<double> sorted = a;
        std::sort(sorted.begin(), sorted.end());
        bool ok = true;
        for (int i = 0; i < count; ++i) {
            double gap = (i + 1 < count) ? sorted[i + 1] - sorted[i]
                                         : two_pi - sorted[count - 1] + sorted[0];
            if (gap < min_sep) {
                ok = false;
                break;
            }
        }
        if (ok) return a;
    }
    throw std::runtime_error("separated_angles: rejection sampling failed");
}

// Random non-crossing perfect matching of sorted angles by recursive
// splitting; returns index pairs.
inline void noncrossing_pairs(Rng& rng, int lo, int hi, std::vector<std::pair<int, int>>& out) {
    if (lo >= hi) return;
    int span = hi - lo + 1;
    std::uniform_int_distribution<int> pick(0, span / 2 - 1);
    int partner = lo + 1 + 2 * pick(rng);
    out.emplace_back(lo, partner);
    noncrossing_pairs(rng, lo + 1, partner - 1, out);
    noncrossing_pairs(rng, partner + 1, hi, out);
}

inline MeasuredLamination random_lamination(Rng& rng, int max_atoms, double min_sep = 1e-3,
                                            double wlo = 1e-3, double whi = 5.0) {
    std::uniform_int_distribution<int> na(1, max_atoms);
    int n = na(rng);
    std::vector<double> angles = separated_angles(rng, 2 * n, min_sep);
    std::sort(angles.begin(), angles.end());
    std::vector<std::pair<int, int>> pairs;
    noncrossing_pairs(rng, 0, 2 * n - 1, pairs);
    MeasuredLamination lam;
    for (auto [i, j] : pairs) {
        double w = std::exp(uniform(rng, std::log(wlo), std::log(whi)));
        lam.atoms.push_back({Geodesic(BoundaryPoint(angles[i]), BoundaryPoint(angles[j])), w});
    }
    return lam;
}

// Independent side oracle: in the half-plane a geodesic is a vertical line
// or a semicircle; compare against the defining form directly.
inline int side_oracle(const Geodesic& g, Complex z_disk) {
    double x1 = g.p.half_plane();
    double x2 = g.q.half_plane();
    Complex w = disk_to_half(z_disk);
    if (std::isinf(x1) || std::isinf(x2)) {
        double x = std::isinf(x1) ? x2 : x1;
        return w.real() > x ? 1 : (w.real() < x ? -1 : 0);
    }
    double center = (x1 + x2) / 2.0;
    double radius = std::fabs(x1 - x2) / 2.0;
    double v = std::norm(w - Complex(center, 0.0)) - radius * radius;
    return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
}

} // namespace testutil
