#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <string>

#include "mixedeig/errors.hpp"
#include "mixedeig/lattice.hpp"

namespace mixedeig {

// Open half-space H = {x : x . n < a} together with the reflection sigma
// across its boundary hyperplane. Supported normals are the axis directions
// and, in 2-D, the two diagonals (e1 -/+ e2)/sqrt(2).
//
// Internal parameterization keeps reflections exact on the lattice:
//   axis k:        boundary coordinate a;      sigma: x_k -> 2a - x_k
//   diag  (1,-1):  q = sqrt(2) * a;            sigma: (x, y) -> (y + q, x - q)
//   anti  (1, 1):  q = sqrt(2) * a;            sigma: (x, y) -> (q - y, q - x)
// `side` flips the normal (H on the other side of the same hyperplane).
class Polarizer {
public:
    enum class Kind { axis0, axis1, diag_main, diag_anti };

    static Polarizer axis(int k, double a, int side = +1) {
        if (k != 0 && k != 1) throw geometry_error("polarizer: axis must be 0 or 1");
        return Polarizer(k == 0 ? Kind::axis0 : Kind::axis1, a, side);
    }
    // Diagonal hyperplane x - y = q (main) or x + y = q (anti); q = sqrt(2)*a.
    static Polarizer diagonal_main(double q, int side = +1) {
        return Polarizer(Kind::diag_main, q, side);
    }
    static Polarizer diagonal_anti(double q, int side = +1) {
        return Polarizer(Kind::diag_anti, q, side);
    }

    Kind kind() const { return kind_; }
    int side() const { return side_; }
    double param() const { return par_; }

    // Signed offset a with H = {x . n < a} for the unit normal below.
    double offset_a() const {
        const double a = (kind_ == Kind::axis0 || kind_ == Kind::axis1) ? par_ : par_ / std::sqrt(2.0);
        return side_ > 0 ? a : -a;
    }

    std::array<double, 2> normal() const {
        const double s = static_cast<double>(side_);
        const double r = 1.0 / std::sqrt(2.0);
        switch (kind_) {
            case Kind::axis0: return {s, 0.0};
            case Kind::axis1: return {0.0, s};
            case Kind::diag_main: return {s * r, -s * r};
            default: return {s * r, s * r};
        }
    }

    bool through_origin() const { return par_ == 0.0; }

    // Reflection across the boundary hyperplane (independent of side).
    std::array<double, 2> reflect_point(const std::array<double, 2>& x) const {
        switch (kind_) {
            case Kind::axis0: return {2.0 * par_ - x[0], x[1]};
            case Kind::axis1: return {x[0], 2.0 * par_ - x[1]};
            case Kind::diag_main: return {x[1] + par_, x[0] - par_};
            default: return {par_ - x[1], par_ - x[0]};
        }
    }

    std::string describe() const {
        char buf[64];
        const char* names[] = {"axis0", "axis1", "diag", "anti"};
        std::snprintf(buf, sizeof(buf), "%s:%+d:%.12g", names[static_cast<int>(kind_)], side_, par_);
        return buf;
    }

    // Lattice binding. Reflection and side tests reduce to integer forms:
    //   axis k:  c = 2*(a - origin_k)/h      node: sign of side*(2 i_k - c)
    //   diag:    c = (q - ox + oy)/h         node: sign of side*((i - j) - c)
    //   anti:    c = (q - ox - oy)/h         node: sign of side*((i + j) - c)
    struct Bound {
        Kind kind;
        int side;
        long long c;
        std::array<int, 2> extent;

        // <0 inside H, 0 on the hyperplane, >0 strictly on the other side.
        int classify(int ix, int iy) const {
            long long v;
            switch (kind) {
                case Kind::axis0: v = 2LL * ix - c; break;
                case Kind::axis1: v = 2LL * iy - c; break;
                case Kind::diag_main: v = static_cast<long long>(ix) - iy - c; break;
                default: v = static_cast<long long>(ix) + iy - c; break;
            }
            v *= side;
            return v < 0 ? -1 : (v == 0 ? 0 : +1);
        }

        // Reflected node in index space; may land outside the box.
        std::array<int, 2> reflect(int ix, int iy) const {
            switch (kind) {
                case Kind::axis0: return {static_cast<int>(c - ix), iy};
                case Kind::axis1: return {ix, static_cast<int>(c - iy)};
                case Kind::diag_main:
                    return {static_cast<int>(iy + c), static_cast<int>(ix - c)};
                default: return {static_cast<int>(c - iy), static_cast<int>(c - ix)};
            }
        }

        bool in_box(const std::array<int, 2>& ij) const {
            return ij[0] >= 0 && ij[0] < extent[0] && ij[1] >= 0 && ij[1] < extent[1];
        }
    };

    // Binds the polarizer to a lattice; throws if the reflection does not map
    // nodes to nodes. Axis boundaries may sit on nodes or between them
    // (2(a - origin)/h integer); diagonal boundaries need (q - ...)/h integer.
    Bound resolve(const Lattice& lat) const {
        if (lat.dim == 1 && kind_ != Kind::axis0)
            throw geometry_error("polarizer: only axis-0 polarizers exist in 1-D");
        double cf;
        switch (kind_) {
            case Kind::axis0: cf = 2.0 * (par_ - lat.origin[0]) / lat.h; break;
            case Kind::axis1: cf = 2.0 * (par_ - lat.origin[1]) / lat.h; break;
            case Kind::diag_main: cf = (par_ - lat.origin[0] + lat.origin[1]) / lat.h; break;
            default: cf = (par_ - lat.origin[0] - lat.origin[1]) / lat.h; break;
        }
        const long long c = std::llround(cf);
        if (std::abs(cf - static_cast<double>(c)) > 1e-9 * (1.0 + std::abs(cf)))
            throw geometry_error("polarizer not lattice-compatible: " + describe());
        return Bound{kind_, side_, c, lat.extent};
    }

    bool lattice_compatible(const Lattice& lat) const {
        try {
            (void)resolve(lat);
            return true;
        } catch (const geometry_error&) {
            return false;
        }
    }

    // True when sigma maps the box node set onto itself. This forces the
    // hyperplane through the box midpoint (and a square box for diagonals).
    bool box_symmetric(const Lattice& lat) const {
        if (!lattice_compatible(lat)) return false;
        const Bound b = resolve(lat);
        switch (kind_) {
            case Kind::axis0: return b.c == lat.nx() - 1;
            case Kind::axis1: return b.c == lat.ny() - 1;
            case Kind::diag_main: return b.c == 0 && lat.nx() == lat.ny();
            default: return b.c == lat.nx() - 1 && lat.nx() == lat.ny();
        }
    }

private:
    Polarizer(Kind kind, double par, int side) : kind_(kind), side_(side >= 0 ? +1 : -1), par_(par) {}

    Kind kind_;
    int side_;
    double par_;
};

// Smallest box extension of `lat` whose node set is sigma-invariant: the hull
// of the box and its reflection. One step suffices because sigma is an
// involution mapping axis-aligned boxes to axis-aligned boxes.
inline Lattice symmetrize_lattice(const Lattice& lat, const Polarizer& pol) {
    const Polarizer::Bound b = pol.resolve(lat);
    std::array<int, 2> lo{0, 0}, hi{lat.nx() - 1, lat.ny() - 1};
    const std::array<std::array<int, 2>, 4> corners{{{lo[0], lo[1]}, {hi[0], lo[1]}, {lo[0], hi[1]}, {hi[0], hi[1]}}};
    std::array<int, 2> nlo = lo, nhi = hi;
    for (const auto& cr : corners) {
        const auto r = b.reflect(cr[0], cr[1]);
        for (int k = 0; k < 2; ++k) {
            nlo[k] = std::min(nlo[k], r[k]);
            nhi[k] = std::max(nhi[k], r[k]);
        }
    }
    if (lat.dim == 1) {
        nlo[1] = 0;
        nhi[1] = 0;
    }
    Lattice out(lat.dim, lat.h,
                {nhi[0] - nlo[0] + 1, nhi[1] - nlo[1] + 1},
                {lat.origin[0] + lat.h * nlo[0], lat.origin[1] + lat.h * nlo[1]});
    if (!pol.box_symmetric(out))
        throw geometry_error("symmetrize_lattice: expansion failed for " + pol.describe());
    return out;
}

} // namespace mixedeig
