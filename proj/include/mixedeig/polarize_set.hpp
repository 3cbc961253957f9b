#pragma once

#include "mixedeig/lattice.hpp"
#include "mixedeig/polarizer.hpp"

namespace mixedeig {

// Two-point rearrangement of a node set:
//   P_H(S) = [(S u sigma(S)) n H] u [S n sigma(S)].
// Evaluated per node from the membership of the node and its mirror; nodes on
// the hyperplane keep their original membership (sigma fixes them). Inside
// nodes whose mirror leaves the box are rejected, since their mirror
// membership would be unknowable.
inline DomainMask polarize_mask(const DomainMask& m, const Polarizer& pol) {
    const Lattice& lat = m.lattice();
    const Polarizer::Bound b = pol.resolve(lat);
    DomainMask out(lat);
    for (int idx = 0; idx < lat.nodes(); ++idx) {
        const auto ij = lat.unpack(idx);
        const auto rij = b.reflect(ij[0], ij[1]);
        const bool here = m.inside(idx);
        bool mirror = false;
        if (b.in_box(rij)) {
            mirror = m.inside(lat.pack(rij[0], rij[1]));
        } else if (here) {
            throw geometry_error("polarize_mask: reflection of an inside node leaves the box");
        }
        const int cls = b.classify(ij[0], ij[1]);
        bool val;
        if (cls < 0)
            val = here || mirror;
        else if (cls == 0)
            val = here;
        else
            val = here && mirror;
        if (val) out.set(idx, true);
    }
    return out;
}

struct WitnessSets {
    DomainMask A; // sigma(S) n complement(S) n H : nonempty iff P_H(S) != S
    DomainMask B; // S n sigma(complement(S)) n H : nonempty iff P_H(S) != sigma(S)
};

inline WitnessSets witness_sets(const DomainMask& m, const Polarizer& pol) {
    const Lattice& lat = m.lattice();
    const Polarizer::Bound b = pol.resolve(lat);
    WitnessSets w{DomainMask(lat), DomainMask(lat)};
    for (int idx = 0; idx < lat.nodes(); ++idx) {
        const auto ij = lat.unpack(idx);
        if (b.classify(ij[0], ij[1]) >= 0) continue;
        const auto rij = b.reflect(ij[0], ij[1]);
        const bool here = m.inside(idx);
        const bool mirror = b.in_box(rij) && m.inside(lat.pack(rij[0], rij[1]));
        if (mirror && !here) w.A.set(idx, true);
        if (here && !mirror) w.B.set(idx, true);
    }
    return w;
}

} // namespace mixedeig
