#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "mixedeig/energy.hpp"
#include "mixedeig/errors.hpp"
#include "mixedeig/grid_function.hpp"
#include "mixedeig/polarize_set.hpp"
#include "mixedeig/polarizer.hpp"
#include "mixedeig/shapes.hpp"

namespace mixedeig {

// Two-point rearrangement of a nonnegative function:
//   (P_H u)(x) = max(u(x), u(sigma x)) on H, min(u(x), u(sigma x)) off H,
// and u(x) itself on the hyperplane. Requires a box that is symmetric under
// sigma so every node has its mirror value available; the result is
// supported on polarize_mask(support, H).
inline GridFunction polarize_function(const GridFunction& u, const Polarizer& pol) {
    const Lattice& lat = u.lattice();
    if (!pol.box_symmetric(lat))
        throw rearrange_error("polarize_function: box not symmetric under " + pol.describe());
    if (!u.nonnegative())
        throw rearrange_error("polarize_function: input must be nonnegative");
    const Polarizer::Bound b = pol.resolve(lat);
    const auto& v = u.values();
    std::vector<double> out(v.size(), 0.0);
    for (int idx = 0; idx < lat.nodes(); ++idx) {
        const auto ij = lat.unpack(idx);
        const auto rij = b.reflect(ij[0], ij[1]);
        const double here = v[static_cast<std::size_t>(idx)];
        const double mirror = v[static_cast<std::size_t>(lat.pack(rij[0], rij[1]))];
        const int cls = b.classify(ij[0], ij[1]);
        out[static_cast<std::size_t>(idx)] =
            cls < 0 ? std::max(here, mirror) : (cls == 0 ? here : std::min(here, mirror));
    }
    return GridFunction(lat, polarize_mask(u.support_mask(), pol), std::move(out));
}

// ||u - v||_p on a shared box.
inline double distance_p(const GridFunction& u, const GridFunction& v, double p) {
    if (u.lattice() != v.lattice())
        throw rearrange_error("distance_p: functions live on different boxes");
    const auto& a = u.values();
    const auto& c = v.values();
    const double sum = block_sum(a.size(), [&](std::size_t i) { return detail::abs_pow(a[i] - c[i], p); });
    return std::pow(u.lattice().cell_measure() * sum, 1.0 / p);
}

// Radially decreasing rank-fill rearrangement: sorts the box values in
// descending order and lays them onto the nodes sorted by (distance to
// center, node index). Preserves the value multiset exactly, hence every
// Lp norm. `center2` is 2*(c - origin)/h per axis (integral); defaults to
// the box midpoint.
inline GridFunction schwarz_symmetrize(const GridFunction& u,
                                       std::array<long long, 2> center2 = {-1, -1}) {
    const Lattice& lat = u.lattice();
    if (!u.nonnegative())
        throw rearrange_error("schwarz_symmetrize: input must be nonnegative");
    if (center2[0] < 0) center2 = box_center2(lat);
    const auto order = nodes_by_distance(lat, center2);
    std::vector<double> sorted = u.values();
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    std::vector<double> out(sorted.size(), 0.0);
    for (std::size_t k = 0; k < order.size(); ++k)
        out[static_cast<std::size_t>(order[k])] = sorted[k];

    // Support of the result: equal node count, filled in the same order.
    DomainMask ball(lat);
    const int want = u.support_mask().inside_count();
    for (int k = 0; k < want; ++k) ball.set(order[static_cast<std::size_t>(k)], true);
    return GridFunction(lat, ball, std::move(out));
}

struct PolarizationTrace {
    std::vector<GridFunction> iterates; // u_0, u_1, ..., u_m
    std::vector<double> distances;      // ||u_k - u*||_p, one per iterate
    GridFunction target;                // the rank-fill rearrangement u*
    std::vector<Polarizer> applied;
};

// All box-symmetric polarizers through the box center: both orientations of
// each axis, plus both diagonals in 2-D on square boxes.
inline std::vector<Polarizer> center_polarizer_family(const Lattice& lat) {
    std::vector<Polarizer> fam;
    const double ax = lat.origin[0] + 0.5 * lat.h * (lat.nx() - 1);
    fam.push_back(Polarizer::axis(0, ax, +1));
    fam.push_back(Polarizer::axis(0, ax, -1));
    if (lat.dim == 2) {
        const double ay = lat.origin[1] + 0.5 * lat.h * (lat.ny() - 1);
        fam.push_back(Polarizer::axis(1, ay, +1));
        fam.push_back(Polarizer::axis(1, ay, -1));
        if (lat.nx() == lat.ny()) {
            const double qm = lat.origin[0] - lat.origin[1];
            const double qa = lat.origin[0] + lat.origin[1] + lat.h * (lat.nx() - 1);
            fam.push_back(Polarizer::diagonal_main(qm, +1));
            fam.push_back(Polarizer::diagonal_main(qm, -1));
            fam.push_back(Polarizer::diagonal_anti(qa, +1));
            fam.push_back(Polarizer::diagonal_anti(qa, -1));
        }
    }
    return fam;
}

// Greedy approximation of the rank-fill rearrangement by iterated
// polarization: at every step evaluate up to `budget_k` candidate polarizers
// through the box center and apply the one that decreases ||u_m - u*||_p
// the most (ties to the lowest candidate index); stop when no candidate
// decreases the distance or after `max_steps` applications. The distance
// sequence is non-increasing by construction. The RNG only matters when
// budget_k is smaller than the candidate family.
inline PolarizationTrace iterate_polarizations(const GridFunction& u0, double p, int max_steps,
                                               std::mt19937_64& rng, int budget_k = 16) {
    const Lattice& lat = u0.lattice();
    if (!u0.nonnegative())
        throw rearrange_error("iterate_polarizations: input must be nonnegative");
    const auto family = center_polarizer_family(lat);

    PolarizationTrace tr;
    tr.target = schwarz_symmetrize(u0);
    tr.iterates.push_back(u0);
    tr.distances.push_back(distance_p(u0, tr.target, p));

    GridFunction cur = u0;
    for (int step = 0; step < max_steps; ++step) {
        std::vector<std::size_t> cand(family.size());
        for (std::size_t i = 0; i < cand.size(); ++i) cand[i] = i;
        if (budget_k > 0 && static_cast<std::size_t>(budget_k) < family.size()) {
            std::shuffle(cand.begin(), cand.end(), rng);
            cand.resize(static_cast<std::size_t>(budget_k));
            std::sort(cand.begin(), cand.end());
        }
        double best = tr.distances.back();
        int best_i = -1;
        GridFunction best_fn;
        for (const std::size_t ci : cand) {
            GridFunction trial = polarize_function(cur, family[ci]);
            const double d = distance_p(trial, tr.target, p);
            if (d < best) {
                best = d;
                best_i = static_cast<int>(ci);
                best_fn = std::move(trial);
            }
        }
        if (best_i < 0) break;
        cur = std::move(best_fn);
        tr.iterates.push_back(cur);
        tr.distances.push_back(best);
        tr.applied.push_back(family[static_cast<std::size_t>(best_i)]);
    }
    return tr;
}

} // namespace mixedeig
