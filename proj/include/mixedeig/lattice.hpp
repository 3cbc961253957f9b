#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <queue>
#include <vector>

#include "mixedeig/errors.hpp"

namespace mixedeig {

// Uniform node lattice in 1 or 2 dimensions. The lattice *is* the
// computational box: node (i, j) sits at origin + h * (i, j), indices are
// packed row-major (idx = j * nx + i), and functions are extended by zero
// outside the box. For dim == 1 the y-axis degenerates to extent 1.
struct Lattice {
    int dim = 2;
    double h = 1.0;
    std::array<int, 2> extent{1, 1};
    std::array<double, 2> origin{0.0, 0.0};

    Lattice() = default;
    Lattice(int dim_, double h_, std::array<int, 2> extent_, std::array<double, 2> origin_)
        : dim(dim_), h(h_), extent(extent_), origin(origin_) {
        if (dim != 1 && dim != 2) throw geometry_error("lattice: dim must be 1 or 2");
        if (!(h > 0.0)) throw geometry_error("lattice: spacing h must be positive");
        if (dim == 1) extent[1] = 1;
        if (extent[0] < 1 || extent[1] < 1) throw geometry_error("lattice: extent must be >= 1");
    }

    static Lattice line(double h_, int nx, double ox = 0.0) {
        return Lattice(1, h_, {nx, 1}, {ox, 0.0});
    }
    static Lattice plane(double h_, int nx, int ny, double ox = 0.0, double oy = 0.0) {
        return Lattice(2, h_, {nx, ny}, {ox, oy});
    }

    int nx() const { return extent[0]; }
    int ny() const { return extent[1]; }
    int nodes() const { return extent[0] * extent[1]; }

    int pack(int ix, int iy) const { return iy * extent[0] + ix; }
    std::array<int, 2> unpack(int idx) const { return {idx % extent[0], idx / extent[0]}; }

    bool in_box(int ix, int iy) const {
        return ix >= 0 && ix < extent[0] && iy >= 0 && iy < extent[1];
    }

    std::array<double, 2> coord(int idx) const {
        const auto ij = unpack(idx);
        return {origin[0] + h * ij[0], origin[1] + h * ij[1]};
    }

    double cell_measure() const { return dim == 1 ? h : h * h; }

    // Distance from a node to the boundary of the node hull
    // [origin, origin + h*(extent-1)] per axis; zero on the outermost layer.
    double boundary_distance(int idx) const {
        const auto ij = unpack(idx);
        double d = h * std::min(ij[0], extent[0] - 1 - ij[0]);
        if (dim == 2) d = std::min(d, h * std::min(ij[1], extent[1] - 1 - ij[1]));
        return d;
    }

    bool operator==(const Lattice& o) const {
        return dim == o.dim && h == o.h && extent == o.extent && origin == o.origin;
    }
    bool operator!=(const Lattice& o) const { return !(*this == o); }
};

// Node subset of a lattice box. Values of grid functions are forced to zero
// off the mask; the mask also fixes which nodes an eigenvalue solve sees.
class DomainMask {
public:
    DomainMask() = default;
    explicit DomainMask(const Lattice& lat)
        : lat_(lat), in_(static_cast<std::size_t>(lat.nodes()), 0), count_(0) {}
    DomainMask(const Lattice& lat, std::vector<std::uint8_t> in)
        : lat_(lat), in_(std::move(in)) {
        if (in_.size() != static_cast<std::size_t>(lat_.nodes()))
            throw geometry_error("mask: bitmap size does not match lattice");
        count_ = 0;
        for (auto v : in_) count_ += (v != 0);
    }

    const Lattice& lattice() const { return lat_; }
    bool inside(int idx) const { return in_[static_cast<std::size_t>(idx)] != 0; }
    int inside_count() const { return count_; }
    bool empty() const { return count_ == 0; }

    void set(int idx, bool v) {
        auto& cell = in_[static_cast<std::size_t>(idx)];
        count_ += static_cast<int>(v) - static_cast<int>(cell != 0);
        cell = v ? 1 : 0;
    }

    std::vector<int> inside_indices() const {
        std::vector<int> out;
        out.reserve(static_cast<std::size_t>(count_));
        for (int i = 0; i < lat_.nodes(); ++i)
            if (in_[static_cast<std::size_t>(i)]) out.push_back(i);
        return out;
    }

    // Tight index-space bounding box {lo, hi} (inclusive). Empty mask throws.
    std::array<std::array<int, 2>, 2> bounding_box() const {
        if (count_ == 0) throw geometry_error("mask: bounding box of empty mask");
        std::array<int, 2> lo{lat_.nx(), lat_.ny()}, hi{-1, -1};
        for (int idx = 0; idx < lat_.nodes(); ++idx) {
            if (!inside(idx)) continue;
            const auto ij = lat_.unpack(idx);
            for (int k = 0; k < 2; ++k) {
                lo[k] = std::min(lo[k], ij[k]);
                hi[k] = std::max(hi[k], ij[k]);
            }
        }
        return {lo, hi};
    }

    // Connectivity in the 2*dim-neighbor sense (2 neighbors in 1-D, 4 in 2-D).
    bool connected() const {
        if (count_ == 0) return false;
        std::vector<std::uint8_t> seen(in_.size(), 0);
        std::queue<int> q;
        int start = 0;
        while (!inside(start)) ++start;
        q.push(start);
        seen[static_cast<std::size_t>(start)] = 1;
        int reached = 0;
        while (!q.empty()) {
            const int idx = q.front();
            q.pop();
            ++reached;
            const auto ij = lat_.unpack(idx);
            const int sx[4] = {1, -1, 0, 0}, sy[4] = {0, 0, 1, -1};
            const int ndirs = lat_.dim == 1 ? 2 : 4;
            for (int d = 0; d < ndirs; ++d) {
                const int jx = ij[0] + sx[d], jy = ij[1] + sy[d];
                if (!lat_.in_box(jx, jy)) continue;
                const int jdx = lat_.pack(jx, jy);
                if (inside(jdx) && !seen[static_cast<std::size_t>(jdx)]) {
                    seen[static_cast<std::size_t>(jdx)] = 1;
                    q.push(jdx);
                }
            }
        }
        return reached == count_;
    }

    bool operator==(const DomainMask& o) const { return lat_ == o.lat_ && in_ == o.in_; }
    bool operator!=(const DomainMask& o) const { return !(*this == o); }

private:
    Lattice lat_{};
    std::vector<std::uint8_t> in_;
    int count_ = 0;
};

// Lebesgue surrogate: cell measure times node count.
inline double mask_measure(const DomainMask& m) {
    return m.lattice().cell_measure() * m.inside_count();
}

// Graph distance (in steps) from each node to the mask complement; 0 off the
// mask, 1 on the innermost boundary layer, increasing inward. Multi-source
// BFS from the complement, with the box border acting as complement too.
inline std::vector<int> erosion_depth(const DomainMask& m) {
    const Lattice& lat = m.lattice();
    const int n = lat.nodes();
    std::vector<int> depth(static_cast<std::size_t>(n), -1);
    std::queue<int> q;
    const int ndirs = lat.dim == 1 ? 2 : 4;
    const int sx[4] = {1, -1, 0, 0}, sy[4] = {0, 0, 1, -1};
    for (int idx = 0; idx < n; ++idx) {
        if (!m.inside(idx)) {
            depth[static_cast<std::size_t>(idx)] = 0;
            continue;
        }
        const auto ij = lat.unpack(idx);
        bool border = false;
        for (int d = 0; d < ndirs && !border; ++d)
            border = !lat.in_box(ij[0] + sx[d], ij[1] + sy[d]);
        if (border) {
            // An inside node on the box border is one step from the exterior.
            depth[static_cast<std::size_t>(idx)] = 1;
            q.push(idx);
        }
    }
    for (int idx = 0; idx < n; ++idx) {
        if (depth[static_cast<std::size_t>(idx)] != 0) continue;
        const auto ij = lat.unpack(idx);
        for (int d = 0; d < ndirs; ++d) {
            const int jx = ij[0] + sx[d], jy = ij[1] + sy[d];
            if (!lat.in_box(jx, jy)) continue;
            const int jdx = lat.pack(jx, jy);
            if (m.inside(jdx) && depth[static_cast<std::size_t>(jdx)] == -1) {
                depth[static_cast<std::size_t>(jdx)] = 1;
                q.push(jdx);
            }
        }
    }
    while (!q.empty()) {
        const int idx = q.front();
        q.pop();
        const auto ij = lat.unpack(idx);
        for (int d = 0; d < ndirs; ++d) {
            const int jx = ij[0] + sx[d], jy = ij[1] + sy[d];
            if (!lat.in_box(jx, jy)) continue;
            const int jdx = lat.pack(jx, jy);
            if (depth[static_cast<std::size_t>(jdx)] == -1) {
                depth[static_cast<std::size_t>(jdx)] = depth[static_cast<std::size_t>(idx)] + 1;
                q.push(jdx);
            }
        }
    }
    return depth;
}

} // namespace mixedeig
