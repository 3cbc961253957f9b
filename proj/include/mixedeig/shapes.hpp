#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mixedeig/errors.hpp"
#include "mixedeig/lattice.hpp"

namespace mixedeig {

// Constructive solid geometry for test domains. A node belongs to the mask
// iff its cell center satisfies the open-set predicate; subtrahends of a
// difference are evaluated closed, so difference(ball R, ball r) excludes the
// closed inner ball exactly like an annulus.
struct ShapeSpec {
    enum class Kind { ball, annulus, rectangle, union_of, difference };

    Kind kind = Kind::ball;
    std::array<double, 2> center{0.0, 0.0};  // ball / annulus outer center
    double radius = 1.0;                     // ball / annulus outer radius
    std::array<double, 2> hole_center{0.0, 0.0};
    double hole_radius = 0.0;                // annulus inner radius (closed)
    std::array<double, 2> lo{0.0, 0.0}, hi{1.0, 1.0};  // rectangle corners (open)
    std::vector<ShapeSpec> parts;            // union_of / difference children

    static ShapeSpec ball(std::array<double, 2> c, double R) {
        ShapeSpec s;
        s.kind = Kind::ball;
        s.center = c;
        s.radius = R;
        return s;
    }
    static ShapeSpec annulus(std::array<double, 2> c, double R, std::array<double, 2> hc, double r) {
        ShapeSpec s;
        s.kind = Kind::annulus;
        s.center = c;
        s.radius = R;
        s.hole_center = hc;
        s.hole_radius = r;
        return s;
    }
    static ShapeSpec rectangle(std::array<double, 2> lo_, std::array<double, 2> hi_) {
        ShapeSpec s;
        s.kind = Kind::rectangle;
        s.lo = lo_;
        s.hi = hi_;
        return s;
    }
    static ShapeSpec union_of(std::vector<ShapeSpec> parts_) {
        ShapeSpec s;
        s.kind = Kind::union_of;
        s.parts = std::move(parts_);
        return s;
    }
    // parts[0] minus the closure of parts[1..].
    static ShapeSpec difference(std::vector<ShapeSpec> parts_) {
        ShapeSpec s;
        s.kind = Kind::difference;
        s.parts = std::move(parts_);
        return s;
    }

    bool contains(const std::array<double, 2>& x, int dim) const {
        switch (kind) {
            case Kind::ball:
                return dist2(x, center, dim) < radius * radius;
            case Kind::annulus:
                return dist2(x, center, dim) < radius * radius &&
                       dist2(x, hole_center, dim) > hole_radius * hole_radius;
            case Kind::rectangle: {
                bool in = lo[0] < x[0] && x[0] < hi[0];
                if (dim == 2) in = in && lo[1] < x[1] && x[1] < hi[1];
                return in;
            }
            case Kind::union_of: {
                for (const auto& p : parts)
                    if (p.contains(x, dim)) return true;
                return false;
            }
            default: {
                if (parts.empty() || !parts[0].contains(x, dim)) return false;
                for (std::size_t i = 1; i < parts.size(); ++i)
                    if (parts[i].contains_closed(x, dim)) return false;
                return true;
            }
        }
    }

    bool contains_closed(const std::array<double, 2>& x, int dim) const {
        switch (kind) {
            case Kind::ball:
                return dist2(x, center, dim) <= radius * radius;
            case Kind::annulus:
                return dist2(x, center, dim) <= radius * radius &&
                       dist2(x, hole_center, dim) >= hole_radius * hole_radius;
            case Kind::rectangle: {
                bool in = lo[0] <= x[0] && x[0] <= hi[0];
                if (dim == 2) in = in && lo[1] <= x[1] && x[1] <= hi[1];
                return in;
            }
            case Kind::union_of: {
                for (const auto& p : parts)
                    if (p.contains_closed(x, dim)) return true;
                return false;
            }
            default: {
                if (parts.empty() || !parts[0].contains_closed(x, dim)) return false;
                for (std::size_t i = 1; i < parts.size(); ++i)
                    if (parts[i].contains(x, dim)) return false;
                return true;
            }
        }
    }

    // Loose world-space bounding box used only to seed lattice construction.
    std::array<std::array<double, 2>, 2> world_bbox() const {
        switch (kind) {
            case Kind::ball:
            case Kind::annulus:
                return {{{center[0] - radius, center[1] - radius},
                         {center[0] + radius, center[1] + radius}}};
            case Kind::rectangle:
                return {{lo, hi}};
            case Kind::union_of: {
                auto bb = parts.at(0).world_bbox();
                for (std::size_t i = 1; i < parts.size(); ++i) {
                    const auto pb = parts[i].world_bbox();
                    for (int k = 0; k < 2; ++k) {
                        bb[0][k] = std::min(bb[0][k], pb[0][k]);
                        bb[1][k] = std::max(bb[1][k], pb[1][k]);
                    }
                }
                return bb;
            }
            default:
                return parts.at(0).world_bbox();
        }
    }

private:
    static double dist2(const std::array<double, 2>& x, const std::array<double, 2>& c, int dim) {
        const double dx = x[0] - c[0];
        const double dy = dim == 2 ? x[1] - c[1] : 0.0;
        return dx * dx + dy * dy;
    }
};

// Classifies every node of an existing lattice against the shape predicate.
inline DomainMask build_mask(const Lattice& lat, const ShapeSpec& shape) {
    DomainMask m(lat);
    for (int idx = 0; idx < lat.nodes(); ++idx)
        if (shape.contains(lat.coord(idx), lat.dim)) m.set(idx, true);
    return m;
}

// Builds the lattice box for a shape: nodes on the h-grid, cropped to the
// tight bounding box of the inside nodes, then padded on every side.
// pad_world < 0 selects the default padding max(largest bbox side, 8h).
// Node coordinates stay on the global k*h grid, so translating a shape by a
// lattice vector translates the discretization exactly.
struct Domain {
    Lattice lattice;
    DomainMask mask;
};

inline Domain build_domain(const ShapeSpec& shape, int dim, double h, double pad_world = -1.0) {
    if (!(h > 0.0)) throw geometry_error("build_domain: h must be positive");
    const auto bb = shape.world_bbox();
    std::array<int, 2> lo{0, 0}, hi{0, 0};
    for (int k = 0; k < dim; ++k) {
        lo[k] = static_cast<int>(std::floor(bb[0][k] / h)) - 1;
        hi[k] = static_cast<int>(std::ceil(bb[1][k] / h)) + 1;
    }
    Lattice probe(dim, h, {hi[0] - lo[0] + 1, dim == 2 ? hi[1] - lo[1] + 1 : 1},
                  {h * lo[0], dim == 2 ? h * lo[1] : 0.0});
    DomainMask probe_mask = build_mask(probe, shape);
    if (probe_mask.empty()) throw geometry_error("build_domain: shape contains no lattice nodes");

    const auto nb = probe_mask.bounding_box();
    int pad_cells;
    if (pad_world < 0.0) {
        const int side = std::max(nb[1][0] - nb[0][0], dim == 2 ? nb[1][1] - nb[0][1] : 0);
        pad_cells = std::max(side, 8);
    } else {
        pad_cells = static_cast<int>(std::ceil(pad_world / h - 1e-12));
        if (pad_cells < 1) pad_cells = 1;
    }

    std::array<int, 2> flo{nb[0][0] - pad_cells, dim == 2 ? nb[0][1] - pad_cells : 0};
    std::array<int, 2> fhi{nb[1][0] + pad_cells, dim == 2 ? nb[1][1] + pad_cells : 0};
    Lattice lat(dim, h, {fhi[0] - flo[0] + 1, dim == 2 ? fhi[1] - flo[1] + 1 : 1},
                {probe.origin[0] + h * flo[0], dim == 2 ? probe.origin[1] + h * flo[1] : 0.0});
    return Domain{lat, build_mask(lat, shape)};
}

// Integer sort key for node-to-center distances: 4 * |x_i - c|^2 / h^2 is an
// integer whenever 2*(c - origin)/h is. Exact keys make every tie explicit
// and leave lexicographic node order as the only tie-break.
struct CenterOrder {
    std::array<long long, 2> m; // 2 * (c - origin) / h per axis
    const Lattice* lat;

    long long key(int idx) const {
        const auto ij = lat->unpack(idx);
        const long long dx = 2LL * ij[0] - m[0];
        const long long dy = lat->dim == 2 ? 2LL * ij[1] - m[1] : 0;
        return dx * dx + dy * dy;
    }
};

// Node index of the box midpoint, rounding half-steps toward lower indices.
inline int center_node(const Lattice& lat) {
    return lat.pack((lat.nx() - 1) / 2, (lat.ny() - 1) / 2);
}

// Nodes of the box sorted by (distance to center, node index). `center2` is
// measured in half-steps: center2 = 2 * (c - origin) / h, which must be
// integral per axis.
inline std::vector<int> nodes_by_distance(const Lattice& lat, std::array<long long, 2> center2) {
    CenterOrder ord{center2, &lat};
    std::vector<int> idx(static_cast<std::size_t>(lat.nodes()));
    for (int i = 0; i < lat.nodes(); ++i) idx[static_cast<std::size_t>(i)] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return ord.key(a) < ord.key(b); });
    return idx;
}

inline std::array<long long, 2> box_center2(const Lattice& lat) {
    return {static_cast<long long>(lat.nx()) - 1, static_cast<long long>(lat.ny()) - 1};
}

// Ball surrogate with the same node count as `m`, centered at the lattice
// point nearest the box center (ties toward lower indices): the first
// inside_count() nodes in (distance, index) order. A partial outermost ring
// is filled in index order; when `m` is itself a lattice ball around that
// center its rings are complete and the fill reproduces `m` exactly.
inline DomainMask equal_measure_ball(const DomainMask& m) {
    const Lattice& lat = m.lattice();
    const int want = m.inside_count();
    if (want > lat.nodes())
        throw geometry_error("equal_measure_ball: lattice too small");
    const int c = center_node(lat);
    const auto cij = lat.unpack(c);
    const auto order = nodes_by_distance(lat, {2LL * cij[0], 2LL * cij[1]});
    DomainMask out(lat);
    for (int i = 0; i < want; ++i) out.set(order[static_cast<std::size_t>(i)], true);
    return out;
}

// Seeded connected mask grown node by node from `start` (default: box
// center). Candidate frontier is kept sorted so growth depends only on the
// RNG stream. `margin` keeps the blob away from the box border.
inline DomainMask random_connected_blob(const Lattice& lat, int target_nodes, std::mt19937_64& rng,
                                        int margin = 0, int start = -1) {
    if (target_nodes < 1) throw geometry_error("random_connected_blob: target must be >= 1");
    DomainMask m(lat);
    const int ndirs = lat.dim == 1 ? 2 : 4;
    const int sx[4] = {1, -1, 0, 0}, sy[4] = {0, 0, 1, -1};
    auto admissible = [&](int ix, int iy) {
        if (ix < margin || ix >= lat.nx() - margin) return false;
        if (lat.dim == 2 && (iy < margin || iy >= lat.ny() - margin)) return false;
        return lat.in_box(ix, iy);
    };
    int seed_node = start >= 0 ? start : center_node(lat);
    {
        const auto ij = lat.unpack(seed_node);
        if (!admissible(ij[0], ij[1]))
            throw geometry_error("random_connected_blob: start violates margin");
    }
    std::vector<int> frontier{seed_node};
    std::vector<std::uint8_t> queued(static_cast<std::size_t>(lat.nodes()), 0);
    queued[static_cast<std::size_t>(seed_node)] = 1;
    while (m.inside_count() < target_nodes) {
        if (frontier.empty())
            throw geometry_error("random_connected_blob: no room to grow");
        std::uniform_int_distribution<std::size_t> pick(0, frontier.size() - 1);
        const std::size_t at = pick(rng);
        const int idx = frontier[at];
        frontier.erase(frontier.begin() + static_cast<std::ptrdiff_t>(at));
        m.set(idx, true);
        const auto ij = lat.unpack(idx);
        for (int d = 0; d < ndirs; ++d) {
            const int jx = ij[0] + sx[d], jy = ij[1] + sy[d];
            if (!admissible(jx, jy)) continue;
            const int jdx = lat.pack(jx, jy);
            if (!queued[static_cast<std::size_t>(jdx)] && !m.inside(jdx)) {
                queued[static_cast<std::size_t>(jdx)] = 1;
                frontier.insert(std::lower_bound(frontier.begin(), frontier.end(), jdx), jdx);
            }
        }
    }
    return m;
}

} // namespace mixedeig
