// Independent reference implementations used to pin expected values.
// These deliberately avoid the engine's priority-queue machinery: travel
// times come from exhaustive simple-path enumeration, and competition
// claims from a literal replay of the two-species infection recursion
// over materialized edge times. They share only the PathTime arithmetic
// with the engine (the same way both sides share '+').
#pragma once

#include <functional>
#include <limits>
#include <map>
#include <vector>

#include "fpcomp/competition.hpp"
#include "fpcomp/fpp.hpp"
#include "fpcomp/lattice.hpp"
#include "fpcomp/pathtime.hpp"
#include "fpcomp/rng.hpp"

namespace oracle {

using fpc::Box;
using fpc::Edge;
using fpc::PathTime;
using fpc::Site;

using WeightFn = std::function<double(const Edge&)>;

/// Minimal travel times from `source` to every box site, by depth-first
/// enumeration of all simple paths (branch pruned once the partial sum
/// stops improving on the incumbent).
inline std::vector<PathTime> all_path_times(const Box& box, const Site& source,
                                            const WeightFn& weight) {
    std::vector<PathTime> best(static_cast<size_t>(box.site_count()), PathTime::infinite());
    std::vector<uint8_t> on_path(static_cast<size_t>(box.site_count()), 0);

    std::function<void(int64_t, PathTime)> dfs = [&](int64_t idx, PathTime t) {
        auto& slot = best[static_cast<size_t>(idx)];
        if (t < slot) slot = t;
        // Keep extending even when not improving this site: a longer
        // prefix may still improve a different site, unless it cannot
        // beat the incumbent anywhere it could ever reach. Pruning on
        // "not an improvement here" alone is wrong; pruning on strictly
        // worse-than-incumbent is safe because weights are nonnegative.
        on_path[static_cast<size_t>(idx)] = 1;
        const Site here = box.site_at(idx);
        for (int axis = 0; axis < box.dim(); ++axis) {
            for (int dir = -1; dir <= 1; dir += 2) {
                const int64_t nidx = box.neighbor_index(idx, axis, dir);
                if (nidx < 0 || on_path[static_cast<size_t>(nidx)]) continue;
                const Site there = here.shifted(axis, dir);
                const PathTime nt =
                    fpc::path_add(t, weight(fpc::edge_between(here, there)));
                if (best[static_cast<size_t>(nidx)] < nt) continue;  // cannot improve there
                dfs(nidx, nt);
            }
        }
        on_path[static_cast<size_t>(idx)] = 0;
    };
    dfs(box.index_of(source), PathTime::zero());
    return best;
}

struct RecursionState {
    std::vector<int8_t> species;   // 0 unclaimed
    std::vector<PathTime> time;
    int64_t ties = 0;
};

using SpeciesWeightFn = std::function<double(const Edge&, int)>;

/// Literal replay of the two-species infection recursion: at every step
/// scan all (occupied y, unclaimed z, species i) relaxations, take the
/// infimum, and claim all its argmins simultaneously. Exact ties across
/// species are resolved for species 2 and counted.
inline RecursionState literal_recursion(const Box& box, const Site& s1, const Site& s2,
                                        const SpeciesWeightFn& weight) {
    RecursionState st;
    st.species.assign(static_cast<size_t>(box.site_count()), 0);
    st.time.assign(static_cast<size_t>(box.site_count()), PathTime::infinite());
    st.species[static_cast<size_t>(box.index_of(s1))] = 1;
    st.time[static_cast<size_t>(box.index_of(s1))] = PathTime::zero();
    st.species[static_cast<size_t>(box.index_of(s2))] = 2;
    st.time[static_cast<size_t>(box.index_of(s2))] = PathTime::zero();

    while (true) {
        PathTime next = PathTime::infinite();
        for (int species = 1; species <= 2; ++species) {
            for (int64_t y = 0; y < box.site_count(); ++y) {
                if (st.species[static_cast<size_t>(y)] != species) continue;
                const Site from = box.site_at(y);
                for (int axis = 0; axis < box.dim(); ++axis) {
                    for (int dir = -1; dir <= 1; dir += 2) {
                        const int64_t z = box.neighbor_index(y, axis, dir);
                        if (z < 0 || st.species[static_cast<size_t>(z)] != 0) continue;
                        const Site to = from.shifted(axis, dir);
                        const PathTime cand = fpc::path_add(
                            st.time[static_cast<size_t>(y)],
                            weight(fpc::edge_between(from, to), species));
                        if (cand < next) next = cand;
                    }
                }
            }
        }
        if (next.is_infinite()) break;

        // Claims at the infimum: collect argmin (species, target) pairs.
        bool by1 = false, by2 = false;
        std::map<int64_t, int> claims;  // target -> species (2 wins ties)
        for (int species = 1; species <= 2; ++species) {
            for (int64_t y = 0; y < box.site_count(); ++y) {
                if (st.species[static_cast<size_t>(y)] != species) continue;
                const Site from = box.site_at(y);
                for (int axis = 0; axis < box.dim(); ++axis) {
                    for (int dir = -1; dir <= 1; dir += 2) {
                        const int64_t z = box.neighbor_index(y, axis, dir);
                        if (z < 0 || st.species[static_cast<size_t>(z)] != 0) continue;
                        const Site to = from.shifted(axis, dir);
                        const PathTime cand = fpc::path_add(
                            st.time[static_cast<size_t>(y)],
                            weight(fpc::edge_between(from, to), species));
                        if (cand == next) {
                            (species == 1 ? by1 : by2) = true;
                            auto [it, inserted] = claims.emplace(z, species);
                            if (!inserted && it->second != species) {
                                it->second = 2;  // species 2 wins the exact tie
                            }
                        }
                    }
                }
            }
        }
        if (by1 && by2) ++st.ties;
        for (const auto& [z, species] : claims) {
            st.species[static_cast<size_t>(z)] = static_cast<int8_t>(species);
            st.time[static_cast<size_t>(z)] = next;
        }
    }
    return st;
}

/// Deterministic uniform direction on the l2 sphere (Box-Muller).
inline fpc::Vec random_unit(fpc::rng::Sequence& seq, int d) {
    fpc::Vec v(d);
    double n2 = 0.0;
    while (true) {
        n2 = 0.0;
        for (int i = 0; i < d; ++i) {
            const double u1 = std::max(seq.next_unit(), 1e-300);
            const double u2 = seq.next_unit();
            v[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
            n2 += v[i] * v[i];
        }
        if (n2 > 1e-12) break;
    }
    const double inv = 1.0 / std::sqrt(n2);
    for (double& x : v) x *= inv;
    return v;
}

}  // namespace oracle
