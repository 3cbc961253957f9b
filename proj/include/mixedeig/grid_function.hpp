#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "mixedeig/errors.hpp"
#include "mixedeig/lattice.hpp"

namespace mixedeig {

// Real-valued function on a lattice box, identically zero outside its
// support mask (the constructor enforces this, which is what makes the
// support-restricted energy decompositions exact). The mask may be larger
// than the set of nonzero values.
class GridFunction {
public:
    GridFunction() = default;

    GridFunction(const Lattice& lat, DomainMask mask)
        : lat_(lat), mask_(std::move(mask)), values_(static_cast<std::size_t>(lat.nodes()), 0.0) {
        check_mask();
    }

    GridFunction(const Lattice& lat, DomainMask mask, std::vector<double> values)
        : lat_(lat), mask_(std::move(mask)), values_(std::move(values)) {
        check_mask();
        if (values_.size() != static_cast<std::size_t>(lat_.nodes()))
            throw geometry_error("grid function: value vector size does not match lattice");
        for (int i = 0; i < lat_.nodes(); ++i)
            if (!mask_.inside(i)) values_[static_cast<std::size_t>(i)] = 0.0;
    }

    const Lattice& lattice() const { return lat_; }
    const DomainMask& support_mask() const { return mask_; }
    const std::vector<double>& values() const { return values_; }

    double operator[](int idx) const { return values_[static_cast<std::size_t>(idx)]; }

    // Assignment respects the support invariant: writes off the mask throw.
    void set(int idx, double v) {
        if (!mask_.inside(idx)) {
            if (v != 0.0) throw geometry_error("grid function: write outside support mask");
            return;
        }
        values_[static_cast<std::size_t>(idx)] = v;
    }

    void scale(double factor) {
        for (auto& v : values_) v *= factor;
    }

    bool nonnegative() const {
        for (double v : values_)
            if (v < 0.0) return false;
        return true;
    }

    double min_inside() const {
        double m = std::numeric_limits<double>::infinity();
        for (int i = 0; i < lat_.nodes(); ++i)
            if (mask_.inside(i)) m = std::min(m, values_[static_cast<std::size_t>(i)]);
        return m;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    void check_mask() const {
        if (mask_.lattice() != lat_)
            throw geometry_error("grid function: mask lattice does not match box lattice");
    }

    Lattice lat_{};
    DomainMask mask_{};
    std::vector<double> values_;
};

} // namespace mixedeig
