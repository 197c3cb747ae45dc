#pragma once

// Finite-depth model of the solenoid transversal over the rank-2 free
// group with its punctured-torus representation: subgroup enumeration by
// pointed permutation pairs, the chain G_n of intersections of all
// subgroups of index <= n, the profinite metric e^{-n}, the coset space
// G/G_n with the right action t -> t A^{-1}, leafwise lamination families
// (transversely constant lifts and the two-seed family that is not),
// equivariance and transverse-continuity diagnostics, and the cusp
// compact-support criterion.

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "solquake/liouville.hpp"

namespace solquake {

// --- words -------------------------------------------------------------------

// Freely reduced word in the generators a, b; letters are +-1 (a, a^-1)
// and +-2 (b, b^-1).
struct GroupWord {
    std::vector<int8_t> letters;

    GroupWord() = default;

    // Accepts strings over {a, A, b, B} with A = a^-1, B = b^-1.
    static GroupWord parse(const std::string& s) {
        GroupWord w;
        for (char ch : s) {
            switch (ch) {
                case 'a': w = w.append(1); break;
                case 'A': w = w.append(-1); break;
                case 'b': w = w.append(2); break;
                case 'B': w = w.append(-2); break;
                case ' ': break;
                default: throw DegenerateInput("GroupWord::parse: bad letter");
            }
        }
        return w;
    }

    std::string str() const {
        std::string s;
        for (int8_t l : letters)
            s += l == 1 ? 'a' : (l == -1 ? 'A' : (l == 2 ? 'b' : 'B'));
        return s.empty() ? "e" : s;
    }

    bool is_identity() const { return letters.empty(); }
    std::size_t length() const { return letters.size(); }

    GroupWord append(int8_t letter) const {
        GroupWord w = *this;
        if (!w.letters.empty() && w.letters.back() == -letter)
            w.letters.pop_back();
        else
            w.letters.push_back(letter);
        return w;
    }

    GroupWord concat(const GroupWord& other) const {
        GroupWord w = *this;
        for (int8_t l : other.letters) w = w.append(l);
        return w;
    }

    GroupWord inverse() const {
        GroupWord w;
        for (auto it = letters.rbegin(); it != letters.rend(); ++it)
            w.letters.push_back(static_cast<int8_t>(-*it));
        return w;
    }

    GroupWord conjugate_by(const GroupWord& g) const {
        return g.concat(*this).concat(g.inverse());
    }

    GroupWord pow(int k) const {
        GroupWord base = k >= 0 ? *this : inverse();
        GroupWord w;
        for (int i = 0; i < std::abs(k); ++i) w = w.concat(base);
        return w;
    }

    bool operator==(const GroupWord& o) const { return letters == o.letters; }
    bool operator<(const GroupWord& o) const { return letters < o.letters; }
};

// All freely reduced words of length <= radius, identity first, in
// length-lexicographic order.
inline std::vector<GroupWord> words_up_to(int radius) {
    std::vector<GroupWord> out{GroupWord{}};
    std::size_t level_start = 0;
    for (int len = 1; len <= radius; ++len) {
        std::size_t level_end = out.size();
        for (std::size_t i = level_start; i < level_end; ++i)
            for (int8_t l : {int8_t(1), int8_t(-1), int8_t(2), int8_t(-2)})
                if (out[i].letters.empty() || out[i].letters.back() != -l) {
                    GroupWord w = out[i];
                    w.letters.push_back(l);
                    out.push_back(std::move(w));
                }
        level_start = level_end;
    }
    return out;
}

// --- representation ------------------------------------------------------------

// Faithful discrete representation of the rank-2 free group as the
// punctured-torus group: a -> [[1,1],[1,2]], b -> [[1,-1],[-1,2]]; the
// commutator is parabolic (the cusp).
struct PuncturedTorusRep {
    MobiusMap gen_a, gen_b, gen_a_inv, gen_b_inv;

    PuncturedTorusRep() {
        gen_a = MobiusMap::from_entries(1.0, 1.0, 1.0, 2.0);
        gen_b = MobiusMap::from_entries(1.0, -1.0, -1.0, 2.0);
        gen_a_inv = gen_a.inverse();
        gen_b_inv = gen_b.inverse();
    }

    MobiusMap matrix_of(const GroupWord& w) const {
        MobiusMap m;
        for (int8_t l : w.letters) {
            switch (l) {
                case 1: m = m * gen_a; break;
                case -1: m = m * gen_a_inv; break;
                case 2: m = m * gen_b; break;
                default: m = m * gen_b_inv; break;
            }
        }
        return m;
    }

    Geodesic axis_of(const GroupWord& w) const {
        AxisEndpoints ax = hyperbolic_axis(matrix_of(w));
        return Geodesic(ax.repelling, ax.attracting);
    }

    // The normalization sending the fixed point of the commutator (the
    // cusp) to infinity, with the parabolic acting as z -> z + 1.
    struct CuspData {
        MobiusMap conjugating;  // sends the cusp fixed point to infinity
        GroupWord parabolic;    // becomes z -> z + 1 after conjugation
    };

    CuspData cusp_normalization() const {
        GroupWord comm = GroupWord::parse("abAB");
        MobiusMap p = matrix_of(comm);
        // Parabolic fixed point x0 = (a - d) / (2c).
        double x0 = (p.a - p.d) / (2.0 * p.c);
        // Send x0 -> infinity, then rescale so the translation length is 1.
        MobiusMap send = MobiusMap::from_entries(0.0, 1.0, -1.0, x0); // x -> 1/(x0 - x)... maps x0 -> inf
        MobiusMap moved = send * p * send.inverse();
        // moved fixes infinity: z -> z + shift with shift = b/d (a = d).
        double shift = moved.b / moved.d;
        GroupWord word = comm;
        if (shift < 0.0) {
            word = comm.inverse();
            shift = -shift;
        }
        MobiusMap scale = MobiusMap::from_entries(1.0 / shift, 0.0, 0.0, 1.0);
        return {scale * send, word};
    }
};

// --- covers and chains ----------------------------------------------------------

// A pointed transitive permutation action of the free group on {0..k-1}:
// equivalently a degree-k unbranched pointed cover, equivalently the
// index-k subgroup stabilizing 0.
struct FiniteCover {
    int degree = 1;
    std::vector<int> sigma_a, sigma_b;
    std::vector<int> sigma_a_inv, sigma_b_inv;

    FiniteCover() : sigma_a{0}, sigma_b{0}, sigma_a_inv{0}, sigma_b_inv{0} {}
    FiniteCover(std::vector<int> sa, std::vector<int> sb)
        : degree(static_cast<int>(sa.size())), sigma_a(std::move(sa)), sigma_b(std::move(sb)) {
        if (sigma_b.size() != sigma_a.size())
            throw DegenerateInput("FiniteCover: permutation sizes differ");
        sigma_a_inv.assign(degree, 0);
        sigma_b_inv.assign(degree, 0);
        for (int i = 0; i < degree; ++i) {
            sigma_a_inv[sigma_a[i]] = i;
            sigma_b_inv[sigma_b[i]] = i;
        }
    }

    const std::vector<int>& letter_perm(int8_t l) const {
        switch (l) {
            case 1: return sigma_a;
            case -1: return sigma_a_inv;
            case 2: return sigma_b;
            default: return sigma_b_inv;
        }
    }

    int act(const GroupWord& w, int x) const {
        for (int8_t l : w.letters) x = letter_perm(l)[x];
        return x;
    }

    bool in_stabilizer(const GroupWord& w) const { return act(w, 0) == 0; }

    bool acts_trivially(const GroupWord& w) const {
        for (int x = 0; x < degree; ++x)
            if (act(w, x) != x) return false;
        return true;
    }

    bool joint_transitive() const {
        std::vector<bool> seen(degree, false);
        std::deque<int> queue{0};
        seen[0] = true;
        int count = 1;
        while (!queue.empty()) {
            int x = queue.front();
            queue.pop_front();
            for (const auto* s : {&sigma_a, &sigma_a_inv, &sigma_b, &sigma_b_inv}) {
                int y = (*s)[x];
                if (!seen[y]) {
                    seen[y] = true;
                    ++count;
                    queue.push_back(y);
                }
            }
        }
        return count == degree;
    }

    // Relabels states in breadth-first discovery order from the basepoint
    // (generator order a, a^-1, b, b^-1); two covers define the same
    // subgroup iff their canonical forms coincide.
    FiniteCover canonical() const {
        std::vector<int> label(degree, -1);
        label[0] = 0;
        std::vector<int> order{0};
        std::deque<int> queue{0};
        while (!queue.empty()) {
            int x = queue.front();
            queue.pop_front();
            for (const auto* s : {&sigma_a, &sigma_a_inv, &sigma_b, &sigma_b_inv}) {
                int y = (*s)[x];
                if (label[y] < 0) {
                    label[y] = static_cast<int>(order.size());
                    order.push_back(y);
                    queue.push_back(y);
                }
            }
        }
        std::vector<int> na(degree), nb(degree);
        for (int x = 0; x < degree; ++x) {
            na[label[x]] = label[sigma_a[x]];
            nb[label[x]] = label[sigma_b[x]];
        }
        return FiniteCover(std::move(na), std::move(nb));
    }
};

// All subgroups of the rank-2 free group of index <= n, each as the
// canonical pointed cover whose basepoint stabilizer it is. Complete and
// duplicate-free. Throws on n beyond the cap (combinatorial guard).
inline std::vector<FiniteCover> subgroups_of_index_at_most(int n, int cap = 4) {
    if (n < 1) throw DegenerateInput("subgroups_of_index_at_most: n must be >= 1");
    if (n > cap) throw DegenerateInput("subgroups_of_index_at_most: n exceeds the cap");
    std::vector<FiniteCover> out;
    for (int k = 1; k <= n; ++k) {
        std::vector<int> pa(k), pb(k);
        for (int i = 0; i < k; ++i) pa[i] = i;
        std::set<std::pair<std::vector<int>, std::vector<int>>> seen;
        do {
            for (int i = 0; i < k; ++i) pb[i] = i;
            do {
                FiniteCover cover(pa, pb);
                if (!cover.joint_transitive()) continue;
                FiniteCover canon = cover.canonical();
                auto key = std::make_pair(canon.sigma_a, canon.sigma_b);
                if (seen.insert(key).second) out.push_back(std::move(canon));
            } while (std::next_permutation(pb.begin(), pb.end()));
        } while (std::next_permutation(pa.begin(), pa.end()));
    }
    return out;
}

// The chain G_1 >= G_2 >= ... with G_n the intersection of all subgroups
// of index at most n: a word lies in G_n iff it acts trivially in every
// transitive action of degree <= n. An alternative chain of user-chosen
// normal subgroups (each given by the actions whose kernels cut it out)
// is accepted wherever a CoreChain is.
struct CoreChain {
    int depth = 1;
    // covers_new[l] holds the covers introduced at level l+1 (index 0 is
    // level 1, always empty: G_1 is the whole group).
    std::vector<std::vector<FiniteCover>> covers_new;

    static CoreChain canonical(int depth, int cap = 4) {
        if (depth < 1) throw DegenerateInput("CoreChain: depth must be >= 1");
        CoreChain chain;
        chain.depth = depth;
        chain.covers_new.resize(depth);
        std::vector<FiniteCover> all = subgroups_of_index_at_most(depth, cap);
        for (auto& c : all)
            if (c.degree >= 2) chain.covers_new[c.degree - 1].push_back(std::move(c));
        return chain;
    }

    // User-supplied chain: level l+1 adds the kernels of the listed
    // actions. Level counts start at 1 (= whole group, no covers).
    static CoreChain from_covers(std::vector<std::vector<FiniteCover>> per_level) {
        CoreChain chain;
        chain.covers_new = std::move(per_level);
        if (chain.covers_new.empty() || !chain.covers_new[0].empty())
            throw DegenerateInput("CoreChain: level 1 must be the whole group (no covers)");
        chain.depth = static_cast<int>(chain.covers_new.size());
        return chain;
    }

    bool in_level(const GroupWord& w, int level) const {
        if (level < 1 || level > depth) throw DegenerateInput("CoreChain: level out of range");
        for (int l = 0; l < level; ++l)
            for (const auto& c : covers_new[l])
                if (!c.acts_trivially(w)) return false;
        return true;
    }

    std::vector<const FiniteCover*> covers_up_to(int level) const {
        std::vector<const FiniteCover*> out;
        for (int l = 0; l < level; ++l)
            for (const auto& c : covers_new[l]) out.push_back(&c);
        return out;
    }
};

struct ProfiniteDistance {
    double value = 0.0;
    // Set when the pair is indistinguishable at the chain depth; the value
    // e^{-depth} is then only an upper bound (the true distance may be 0).
    bool at_depth_floor = false;
};

// dist(A, B) = e^{-n} with A B^{-1} in G_n but not G_{n+1}.
inline ProfiniteDistance profinite_dist(const GroupWord& a, const GroupWord& b,
                                        const CoreChain& chain) {
    GroupWord d = a.concat(b.inverse());
    int level = 1;
    while (level < chain.depth && chain.in_level(d, level + 1)) ++level;
    ProfiniteDistance out;
    out.value = std::exp(-static_cast<double>(level));
    out.at_depth_floor = (level == chain.depth) && chain.in_level(d, chain.depth);
    return out;
}

// --- the transversal -------------------------------------------------------------

// The coset space G/G_n materialized as the orbit of the identity under
// the joint permutation action of all covers of the chain up to depth.
// Cosets are indexed; each carries a shortest representative word.
struct TransversalSpace {
    std::shared_ptr<const CoreChain> chain;
    int depth = 1;
    std::vector<const FiniteCover*> covers;
    std::vector<GroupWord> reps;
    std::size_t size() const { return reps.size(); }

    // state = concatenated permutation images, one block per cover
    std::vector<std::vector<int>> states;
    std::unordered_map<std::string, int> index_of_state;

    static std::string key_of(const std::vector<int>& state) {
        std::string k;
        k.reserve(state.size());
        for (int v : state) k.push_back(static_cast<char>('0' + v));
        return k;
    }

    std::vector<int> state_of_word(const GroupWord& w) const {
        std::vector<int> state;
        state.reserve(total_size_);
        for (const auto* c : covers)
            for (int x = 0; x < c->degree; ++x) state.push_back(c->act(w, x));
        return state;
    }

    int coset_of(const GroupWord& w) const {
        auto it = index_of_state.find(key_of(state_of_word(w)));
        if (it == index_of_state.end())
            throw InternalError("TransversalSpace: word leads outside the orbit");
        return it->second;
    }

    // t -> t A^{-1}
    int act_right_inverse(int coset, const GroupWord& a) const {
        prepare_action(a);
        return coset_action_.at(coset_action_key(a))[coset];
    }

    static TransversalSpace build(std::shared_ptr<const CoreChain> chain, int depth,
                                  std::size_t max_cosets = 2'000'000) {
        if (depth < 1 || depth > chain->depth)
            throw DegenerateInput("TransversalSpace: depth out of chain range");
        TransversalSpace space;
        space.chain = std::move(chain);
        space.depth = depth;
        space.covers = space.chain->covers_up_to(depth);
        space.total_size_ = 0;
        for (const auto* c : space.covers) space.total_size_ += c->degree;

        GroupWord id;
        space.states.push_back(space.state_of_word(id));
        space.index_of_state[key_of(space.states[0])] = 0;
        space.reps.push_back(id);
        std::deque<int> queue{0};
        while (!queue.empty()) {
            int i = queue.front();
            queue.pop_front();
            for (int8_t l : {int8_t(1), int8_t(-1), int8_t(2), int8_t(-2)}) {
                std::vector<int> next = space.states[i];
                std::size_t off = 0;
                for (const auto* c : space.covers) {
                    const auto& perm = c->letter_perm(l);
                    for (int x = 0; x < c->degree; ++x) next[off + x] = perm[next[off + x]];
                    off += c->degree;
                }
                std::string k = key_of(next);
                if (!space.index_of_state.count(k)) {
                    if (space.states.size() >= max_cosets)
                        throw DegenerateInput("TransversalSpace: coset space too large");
                    int idx = static_cast<int>(space.states.size());
                    space.index_of_state[k] = idx;
                    space.states.push_back(std::move(next));
                    space.reps.push_back(space.reps[i].append(l));
                    queue.push_back(idx);
                }
            }
        }
        return space;
    }

    // Precomputes (and caches) the right-multiplication table for A^{-1}.
    void prepare_action(const GroupWord& a) const {
        std::string key = coset_action_key(a);
        if (coset_action_.count(key)) return;
        GroupWord ai = a.inverse();
        std::vector<int> table(size());
        for (std::size_t t = 0; t < size(); ++t) {
            std::vector<int> state = states[t];
            std::size_t off = 0;
            for (const auto* c : covers) {
                for (int x = 0; x < c->degree; ++x) {
                    int v = state[off + x];
                    state[off + x] = c->act(ai, v);
                }
                off += c->degree;
            }
            auto it = index_of_state.find(key_of(state));
            if (it == index_of_state.end())
                throw InternalError("TransversalSpace: action leaves the orbit");
            table[t] = it->second;
        }
        coset_action_[key] = std::move(table);
    }

private:
    std::size_t total_size_ = 0;
    static std::string coset_action_key(const GroupWord& a) { return a.str(); }
    mutable std::map<std::string, std::vector<int>> coset_action_;
};

// (A(z), t A^{-1}) on interior points.
inline std::pair<Complex, int> solenoid_action(const PuncturedTorusRep& rep, const GroupWord& a,
                                               Complex z, const TransversalSpace& space,
                                               int coset) {
    space.prepare_action(a);
    return {rep.matrix_of(a).apply_disk(z), space.act_right_inverse(coset, a)};
}

// (A(p), t A^{-1}) on boundary points.
inline std::pair<BoundaryPoint, int> solenoid_action(const PuncturedTorusRep& rep,
                                                     const GroupWord& a, BoundaryPoint p,
                                                     const TransversalSpace& space, int coset) {
    space.prepare_action(a);
    return {rep.matrix_of(a).apply(p), space.act_right_inverse(coset, a)};
}

// --- leafwise laminations ----------------------------------------------------------

// Assignment of a measured lamination to every coset of the working
// transversal, stored through a palette (families of interest assign few
// distinct laminations).
struct LeafwiseLamination {
    std::shared_ptr<const TransversalSpace> space;
    std::vector<MeasuredLamination> palette;
    std::vector<int> assignment; // coset -> palette index

    struct TlcInfo {
        std::vector<std::pair<GroupWord, double>> seeds;
        int radius = 0;
    };
    std::optional<TlcInfo> tlc;

    const MeasuredLamination& at(int coset) const { return palette[assignment[coset]]; }
    std::size_t cosets() const { return assignment.size(); }
};

// Axes of W s W^{-1} over reduced words W of length <= radius, deduplicated.
inline std::vector<Geodesic> conjugate_orbit_axes(const PuncturedTorusRep& rep,
                                                  const GroupWord& seed, int radius) {
    std::vector<Geodesic> axes;
    for (const GroupWord& w : words_up_to(radius)) {
        Geodesic axis = rep.axis_of(seed.conjugate_by(w));
        bool dup = false;
        for (const auto& g : axes)
            if (same_geodesic(g, axis, 1e-9)) {
                dup = true;
                break;
            }
        if (!dup) axes.push_back(axis);
    }
    return axes;
}

// Transversely constant lift: every coset receives the truncated conjugate
// orbit of the seeds. The truncated orbit must be pairwise non-crossing
// (the seeds come from simple curves); a crossing names the conjugators.
inline LeafwiseLamination tlc_lift(const PuncturedTorusRep& rep,
                                   const std::vector<std::pair<GroupWord, double>>& seeds,
                                   int radius, std::shared_ptr<const TransversalSpace> space) {
    MeasuredLamination lam;
    std::vector<GroupWord> origin;
    for (const auto& [seed, weight] : seeds) {
        if (std::fabs(rep.matrix_of(seed).trace()) <= 2.0)
            throw NonHyperbolicMap("tlc_lift: seed is not hyperbolic");
        for (const GroupWord& w : words_up_to(radius)) {
            Geodesic axis = rep.axis_of(seed.conjugate_by(w));
            bool dup = false;
            for (const auto& atom : lam.atoms)
                if (same_geodesic(atom.geodesic, axis, 1e-9)) {
                    dup = true;
                    break;
                }
            if (dup) continue;
            for (std::size_t i = 0; i < lam.atoms.size(); ++i)
                if (geodesics_cross(lam.atoms[i].geodesic, axis))
                    throw CrossingOrbit("tlc_lift: truncated orbit crosses itself",
                                        origin[i].str(), w.str());
            lam.atoms.push_back({axis, weight});
            origin.push_back(w);
        }
    }
    LeafwiseLamination fam;
    fam.space = std::move(space);
    fam.palette = {lam};
    fam.assignment.assign(fam.space->size(), 0);
    fam.tlc = LeafwiseLamination::TlcInfo{seeds, radius};
    return fam;
}

// The two-seed leafwise family that is not transversely constant near the
// identity: at each level i < depth two nontrivial cosets of G_{i+1}
// inside G_i are selected (their difference not a power of either seed
// modulo G_{i+1}); leaves of the first class carry m_i at the first
// seed's axis, leaves of the second m_i at the second's.
struct TwoSeedFamilyLevel {
    int level;                 // i: classes live inside G_i
    GroupWord class1, class2;  // representatives of the chosen cosets of G_{i+1}
};

inline LeafwiseLamination two_seed_family(const PuncturedTorusRep& rep, const GroupWord& seed1,
                                          const GroupWord& seed2,
                                          const std::vector<double>& masses, int depth,
                                          std::shared_ptr<const TransversalSpace> space,
                                          std::vector<TwoSeedFamilyLevel>* chosen = nullptr) {
    Geodesic axis1 = rep.axis_of(seed1);
    Geodesic axis2 = rep.axis_of(seed2);
    if (!geodesics_cross(axis1, axis2))
        throw DegenerateInput("two_seed_family: seed axes must cross (once)");
    if (depth > space->depth)
        throw DegenerateInput("two_seed_family: depth exceeds the transversal depth");
    if (static_cast<int>(masses.size()) < depth - 1)
        throw DegenerateInput("two_seed_family: need a mass per level");
    const CoreChain& chain = *space->chain;

    LeafwiseLamination fam;
    fam.space = space;
    fam.palette = {MeasuredLamination{}};
    fam.assignment.assign(space->size(), 0);

    // Level of a coset: the largest i (up to the working depth, where
    // membership is independent of the representative) with rep in G_i.
    auto level_of = [&](const GroupWord& w) {
        int lvl = 1;
        while (lvl < space->depth && chain.in_level(w, lvl + 1)) ++lvl;
        return lvl;
    };

    for (int level = 1; level < depth; ++level) {
        // Collect distinct nontrivial cosets of G_{level+1} inside G_level.
        std::vector<GroupWord> classes;
        for (std::size_t t = 0; t < space->size(); ++t) {
            const GroupWord& r = space->reps[t];
            if (level_of(r) != level) continue; // in G_level, not G_{level+1}
            bool dup = false;
            for (const auto& c : classes)
                if (chain.in_level(r.concat(c.inverse()), level + 1)) {
                    dup = true;
                    break;
                }
            if (!dup) classes.push_back(r);
        }
        // Order of each seed modulo G_{level+1}.
        auto power_classes = [&](const GroupWord& seed) {
            std::vector<GroupWord> pows;
            GroupWord p;
            for (int k = 0; k < 512; ++k) {
                p = p.concat(seed);
                if (chain.in_level(p, level + 1)) break;
                pows.push_back(p);
            }
            return pows;
        };
        std::vector<GroupWord> pows1 = power_classes(seed1);
        std::vector<GroupWord> pows2 = power_classes(seed2);
        auto admissible = [&](const GroupWord& c1, const GroupWord& c2) {
            GroupWord d = c1.concat(c2.inverse());
            for (const auto& p : pows1)
                if (chain.in_level(d.concat(p.inverse()), level + 1) ||
                    chain.in_level(d.concat(p), level + 1))
                    return false;
            for (const auto& p : pows2)
                if (chain.in_level(d.concat(p.inverse()), level + 1) ||
                    chain.in_level(d.concat(p), level + 1))
                    return false;
            return true;
        };
        bool found = false;
        GroupWord pick1, pick2;
        for (std::size_t i = 0; i < classes.size() && !found; ++i)
            for (std::size_t j = 0; j < classes.size() && !found; ++j) {
                if (i == j) continue;
                if (admissible(classes[i], classes[j])) {
                    pick1 = classes[i];
                    pick2 = classes[j];
                    found = true;
                }
            }
        if (!found)
            throw SelectionUnsatisfiable("two_seed_family: no admissible coset pair at level " +
                                             std::to_string(level),
                                         level);
        if (chosen) chosen->push_back({level, pick1, pick2});

        double mass = masses[level - 1];
        int palette1 = static_cast<int>(fam.palette.size());
        fam.palette.push_back(MeasuredLamination{{{axis1, mass}}});
        int palette2 = static_cast<int>(fam.palette.size());
        fam.palette.push_back(MeasuredLamination{{{axis2, mass}}});
        for (std::size_t t = 0; t < space->size(); ++t) {
            const GroupWord& r = space->reps[t];
            if (level_of(r) != level) continue;
            if (chain.in_level(r.concat(pick1.inverse()), level + 1))
                fam.assignment[t] = palette1;
            else if (chain.in_level(r.concat(pick2.inverse()), level + 1))
                fam.assignment[t] = palette2;
        }
    }
    return fam;
}

// --- diagnostics ---------------------------------------------------------------

struct EquivarianceViolation {
    int coset;
    std::size_t box;
    double lhs, rhs;
    bool truncation_miss; // explained by the truncated orbit radius
};

struct EquivarianceReport {
    std::vector<EquivarianceViolation> violations;
    int cosets_checked = 0;

    bool pass(bool ignore_truncation_misses = false) const {
        for (const auto& v : violations)
            if (!ignore_truncation_misses || !v.truncation_miss) return false;
        return true;
    }
};

// Checks the identity "pushforward by A of the leaf-t lamination equals
// the lamination at t A^{-1}" on box masses. For transversely constant
// lifts, violations are classified as truncation misses when the
// discrepant atoms belong to the conjugate orbit at radius + 2.
inline EquivarianceReport equivariance_check(const PuncturedTorusRep& rep,
                                             const LeafwiseLamination& fam, const GroupWord& a,
                                             const std::vector<GeodesicBox>& boxes, double tol) {
    EquivarianceReport report;
    fam.space->prepare_action(a);
    MobiusMap m = rep.matrix_of(a);
    std::vector<Geodesic> extended;
    if (fam.tlc)
        for (const auto& [seed, weight] : fam.tlc->seeds) {
            auto axes = conjugate_orbit_axes(rep, seed, fam.tlc->radius + 2);
            extended.insert(extended.end(), axes.begin(), axes.end());
        }
    // Box masses only depend on the palette entry, so evaluate per palette
    // pair and report per coset.
    std::map<std::pair<int, int>, std::vector<std::pair<std::size_t, std::array<double, 2>>>>
        cache;
    for (std::size_t t = 0; t < fam.cosets(); ++t) {
        ++report.cosets_checked;
        int image = fam.space->act_right_inverse(static_cast<int>(t), a);
        std::pair<int, int> key{fam.assignment[t], fam.assignment[image]};
        auto it = cache.find(key);
        if (it == cache.end()) {
            MeasuredLamination pushed = pushforward(m, fam.palette[key.first]);
            const MeasuredLamination& target = fam.palette[key.second];
            std::vector<std::pair<std::size_t, std::array<double, 2>>> bad;
            for (std::size_t q = 0; q < boxes.size(); ++q) {
                double lhs = box_mass(pushed, boxes[q]);
                double rhs = box_mass(target, boxes[q]);
                if (std::fabs(lhs - rhs) > tol) bad.push_back({q, {lhs, rhs}});
            }
            it = cache.emplace(key, std::move(bad)).first;
        }
        for (const auto& [q, values] : it->second) {
            bool miss = false;
            if (fam.tlc) {
                // Discrepant mass is a truncation miss if every atom of the
                // pushed lamination inside the box lies in the extended orbit.
                MeasuredLamination pushed = pushforward(m, fam.palette[key.first]);
                miss = true;
                for (const auto& atom : pushed.atoms) {
                    if (!boxes[q].contains(atom.geodesic)) continue;
                    bool in_orbit = false;
                    for (const auto& g : extended)
                        if (same_geodesic(g, atom.geodesic, 1e-8)) in_orbit = true;
                    if (!in_orbit) miss = false;
                }
            }
            report.violations.push_back(
                {static_cast<int>(t), q, values[0], values[1], miss});
        }
    }
    return report;
}

struct ModulusEntry {
    int coset;
    double profinite;
    bool at_depth_floor;
    double frechet;
};

// (profinite distance, Frechet distance) per coset relative to t0, sorted
// by profinite distance descending then coset index. A finite-depth
// continuity certificate is the decay of the Frechet column with the
// profinite one.
inline std::vector<ModulusEntry> transverse_continuity_modulus(const LeafwiseLamination& fam,
                                                               int t0, int n_max = 8,
                                                               int budget = 128,
                                                               std::uint64_t seed = 0) {
    std::vector<ModulusEntry> out;
    const TransversalSpace& space = *fam.space;
    std::map<std::pair<int, int>, double> frechet_cache;
    for (std::size_t t = 0; t < fam.cosets(); ++t) {
        if (static_cast<int>(t) == t0) continue;
        ProfiniteDistance pd =
            profinite_dist(space.reps[t], space.reps[t0], *space.chain);
        std::pair<int, int> key{std::min(fam.assignment[t], fam.assignment[t0]),
                                std::max(fam.assignment[t], fam.assignment[t0])};
        auto it = frechet_cache.find(key);
        if (it == frechet_cache.end())
            it = frechet_cache
                     .emplace(key, frechet_dist(fam.at(static_cast<int>(t)), fam.at(t0), n_max,
                                                budget, seed))
                     .first;
        out.push_back({static_cast<int>(t), pd.value, pd.at_depth_floor, it->second});
    }
    std::sort(out.begin(), out.end(), [](const ModulusEntry& x, const ModulusEntry& y) {
        if (x.profinite != y.profinite) return x.profinite > y.profinite;
        return x.coset < y.coset;
    });
    return out;
}

// --- cusp criterion ---------------------------------------------------------------

struct CuspAtomReport {
    enum class Status { outside, enters_cusp_region, ends_at_cusp };
    std::size_t atom;
    Status status;
    double x = 0.0, y = 0.0; // half-plane endpoints after conjugation
    bool translate_crosses = false;
};

struct CuspReport {
    std::vector<CuspAtomReport> atoms;
    bool any_flagged() const {
        for (const auto& a : atoms)
            if (a.status != CuspAtomReport::Status::outside) return true;
        return false;
    }
};

// Conjugates each atom to the half-plane chart where the cusp parabolic is
// z -> z + 1 and flags atoms whose lift is a half-circle of Euclidean
// radius > 1/2; for flagged atoms verifies that the z -> z + 1 translate
// interleaves (the compact-support obstruction). Atoms with an endpoint at
// the cusp are flagged as ending there.
inline CuspReport cusp_compactness_check(const MeasuredLamination& lam,
                                         const MobiusMap& conjugating) {
    CuspReport report;
    for (std::size_t i = 0; i < lam.size(); ++i) {
        const Geodesic& g = lam.atoms[i].geodesic;
        double x = conjugating.apply_half(g.p.half_plane());
        double y = conjugating.apply_half(g.q.half_plane());
        CuspAtomReport entry{i, CuspAtomReport::Status::outside, x, y, false};
        if (!std::isfinite(x) || !std::isfinite(y) || std::fabs(x) > 1e13 ||
            std::fabs(y) > 1e13) {
            entry.status = CuspAtomReport::Status::ends_at_cusp;
        } else if (std::fabs(x - y) / 2.0 > 0.5) {
            entry.status = CuspAtomReport::Status::enters_cusp_region;
            // Translate (x+1, y+1) interleaves with (x, y).
            Geodesic lift(BoundaryPoint::from_half_plane(x), BoundaryPoint::from_half_plane(y));
            Geodesic moved(BoundaryPoint::from_half_plane(x + 1.0),
                           BoundaryPoint::from_half_plane(y + 1.0));
            entry.translate_crosses = geodesics_cross(lift, moved);
        }
        report.atoms.push_back(entry);
    }
    return report;
}

} // namespace solquake
