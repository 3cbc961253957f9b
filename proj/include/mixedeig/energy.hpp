#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "mixedeig/errors.hpp"
#include "mixedeig/grid_function.hpp"
#include "mixedeig/reduction.hpp"

namespace mixedeig {

// Parameters of the operator  -a * lap_p + b * (-lap_p)^s  on functions that
// vanish outside the domain mask.
struct OperatorParams {
    double p = 2.0;  // integrability exponent, p > 1
    double s = 0.5;  // fractional order, 0 < s < 1
    double a = 1.0;  // local weight, a >= 0
    double b = 1.0;  // nonlocal weight, b > 0
    bool tail_enabled = false;
    enum class LocalForm { edge, euclidean } local_form = LocalForm::edge;

    void validate() const {
        if (!(p > 1.0)) throw energy_error("operator params: p must satisfy p > 1");
        if (!(s > 0.0 && s < 1.0)) throw energy_error("operator params: s must lie in (0, 1)");
        if (!(a >= 0.0)) throw energy_error("operator params: a must be >= 0");
        if (!(b > 0.0)) throw energy_error("operator params: b must be > 0");
    }
};

struct EnergyBreakdown {
    double lp_norm_p = 0.0;      // h^d * sum |u|^p  (= ||u||_p^p)
    double local_energy = 0.0;   // discrete integral of |grad u|^p
    double nonlocal_energy = 0.0;// discrete Gagliardo double sum (+ tail)
    double rayleigh = 0.0;       // (a*local + b*nonlocal) / lp_norm_p
};

namespace detail {

// |t|^(p-2) * t with fast paths for the exponents used throughout the tests.
inline double signed_pow(double t, double p) {
    if (t == 0.0) return 0.0;
    if (p == 2.0) return t;
    if (p == 3.0) return std::abs(t) * t;
    if (p == 1.5) return t / std::sqrt(std::abs(t));
    return std::pow(std::abs(t), p - 2.0) * t;
}

inline double abs_pow(double t, double p) {
    if (t == 0.0) return 0.0;
    const double a = std::abs(t);
    if (p == 2.0) return a * a;
    if (p == 3.0) return a * a * a;
    if (p == 1.5) return a * std::sqrt(a);
    return std::pow(a, p);
}

// Unit ball volume: 2 in 1-D, pi in 2-D.
inline double unit_ball_volume(int dim) { return dim == 1 ? 2.0 : std::numbers::pi; }

} // namespace detail

// Over-estimate of the kernel mass beyond the box as seen from x:
// integral of |x-y|^(-d-ps) over the complement of the ball of radius
// rho(x) = dist(x, box boundary), which contains the box exterior.
inline double tail_kappa(const Lattice& lat, int idx, double p, double s) {
    const double rho = lat.boundary_distance(idx);
    if (!(rho > 0.0)) return std::numeric_limits<double>::infinity();
    const double ps = p * s;
    return lat.dim * detail::unit_ball_volume(lat.dim) * std::pow(rho, -ps) / ps;
}

inline double lp_norm_p(const GridFunction& u, double p) {
    const auto& v = u.values();
    const double sum = block_sum(v.size(), [&](std::size_t i) { return detail::abs_pow(v[i], p); });
    return u.lattice().cell_measure() * sum;
}

// Forward-difference Dirichlet energy. Both forms account for the zero
// extension beyond the box, so they equal the whole-lattice sums whenever the
// support stays inside the box:
//   edge:      h^(d-p) * sum over lattice edges |u_j - u_i|^p
//   euclidean: h^d * sum over nodes (sum_k ((u_{i+e_k} - u_i)/h)^2)^(p/2)
// For p = 2 the two coincide. Only the edge form satisfies the exact
// discrete polarization inequality; euclidean is kept for comparisons.
inline double local_energy(const GridFunction& u, const OperatorParams& par) {
    par.validate();
    const Lattice& lat = u.lattice();
    const auto& v = u.values();
    const double p = par.p;
    std::vector<double> terms;

    if (par.local_form == OperatorParams::LocalForm::edge) {
        terms.reserve(static_cast<std::size_t>(lat.nodes()) * lat.dim + 16);
        // Sweep each axis column with a leading/trailing zero ghost value, so
        // every lattice edge touching the box is counted exactly once.
        for (int j = 0; j < lat.ny(); ++j) {
            double prev = 0.0;
            for (int i = 0; i < lat.nx(); ++i) {
                const double cur = v[static_cast<std::size_t>(lat.pack(i, j))];
                terms.push_back(detail::abs_pow(cur - prev, p));
                prev = cur;
            }
            terms.push_back(detail::abs_pow(prev, p));
        }
        if (lat.dim == 2) {
            for (int i = 0; i < lat.nx(); ++i) {
                double prev = 0.0;
                for (int j = 0; j < lat.ny(); ++j) {
                    const double cur = v[static_cast<std::size_t>(lat.pack(i, j))];
                    terms.push_back(detail::abs_pow(cur - prev, p));
                    prev = cur;
                }
                terms.push_back(detail::abs_pow(prev, p));
            }
        }
        return std::pow(lat.h, lat.dim - p) * pairwise_sum(terms);
    }

    // Euclidean form: forward gradients at box nodes plus the ghost layer
    // below the box per axis (those gradients see exactly one box value).
    terms.reserve(static_cast<std::size_t>(lat.nodes()) + 16);
    const double inv_h2 = 1.0 / (lat.h * lat.h);
    for (int j = 0; j < lat.ny(); ++j) {
        for (int i = 0; i < lat.nx(); ++i) {
            const double c = v[static_cast<std::size_t>(lat.pack(i, j))];
            const double fx = (i + 1 < lat.nx() ? v[static_cast<std::size_t>(lat.pack(i + 1, j))] : 0.0) - c;
            double g2 = fx * fx * inv_h2;
            if (lat.dim == 2) {
                const double fy = (j + 1 < lat.ny() ? v[static_cast<std::size_t>(lat.pack(i, j + 1))] : 0.0) - c;
                g2 += fy * fy * inv_h2;
            }
            terms.push_back(g2 == 0.0 ? 0.0 : std::pow(g2, 0.5 * p));
        }
    }
    double ghost = 0.0;
    for (int j = 0; j < lat.ny(); ++j)
        ghost += detail::abs_pow(v[static_cast<std::size_t>(lat.pack(0, j))], p);
    if (lat.dim == 2)
        for (int i = 0; i < lat.nx(); ++i)
            ghost += detail::abs_pow(v[static_cast<std::size_t>(lat.pack(i, 0))], p);
    return std::pow(lat.h, static_cast<double>(lat.dim)) * pairwise_sum(terms) +
           std::pow(lat.h, lat.dim - p) * ghost;
}

// Precomputed kernel structure for one (lattice, mask, p, s) combination.
// Splits the box double sum for mask-supported functions into
//   2 * sum_{mask pairs} w_ij |u_i - u_j|^p  +  2 * sum_i |u_i|^p * K_i
// where K_i collects the kernel mass from node i to box nodes off the mask.
// The split is exact because grid functions vanish off their mask.
class NonlocalKernel {
public:
    struct Pair {
        int a, b;
        double w; // |x_a - x_b|^(-d-ps), ordered-pair weight
    };

    NonlocalKernel(const Lattice& lat, const DomainMask& mask, double p, double s)
        : lat_(lat), inside_(mask.inside_indices()), p_(p), s_(s) {
        if (mask.lattice() != lat) throw energy_error("nonlocal kernel: mask/lattice mismatch");
        const double expo = 0.5 * (lat.dim + p * s);
        const int nx = lat.nx(), ny = lat.ny();
        // Distance table over squared index offsets (exact integers).
        const std::size_t max_r2 =
            static_cast<std::size_t>(nx - 1) * (nx - 1) + static_cast<std::size_t>(ny - 1) * (ny - 1);
        kernel_by_r2_.assign(max_r2 + 1, 0.0);
        const double hpow = std::pow(lat.h, -(lat.dim + p * s));
        for (std::size_t r2 = 1; r2 <= max_r2; ++r2)
            kernel_by_r2_[r2] = hpow * std::pow(static_cast<double>(r2), -expo);

        const std::size_t m = inside_.size();
        pairs_.reserve(m * (m - 1) / 2);
        for (std::size_t ia = 0; ia < m; ++ia) {
            const auto aij = lat.unpack(inside_[ia]);
            for (std::size_t ib = ia + 1; ib < m; ++ib) {
                const auto bij = lat.unpack(inside_[ib]);
                const long long dx = aij[0] - bij[0], dy = aij[1] - bij[1];
                pairs_.push_back(Pair{inside_[ia], inside_[ib],
                                      kernel_by_r2_[static_cast<std::size_t>(dx * dx + dy * dy)]});
            }
        }

        complement_mass_.assign(m, 0.0);
        for (std::size_t ia = 0; ia < m; ++ia) {
            const auto aij = lat.unpack(inside_[ia]);
            double acc = 0.0;
            for (int idx = 0; idx < lat.nodes(); ++idx) {
                if (mask.inside(idx) || idx == inside_[ia]) continue;
                const auto ij = lat.unpack(idx);
                const long long dx = aij[0] - ij[0], dy = aij[1] - ij[1];
                acc += kernel_by_r2_[static_cast<std::size_t>(dx * dx + dy * dy)];
            }
            complement_mass_[ia] = acc;
        }
    }

    const Lattice& lattice() const { return lat_; }
    const std::vector<int>& inside() const { return inside_; }
    const std::vector<Pair>& pairs() const { return pairs_; }
    const std::vector<double>& complement_mass() const { return complement_mass_; }
    double p() const { return p_; }
    double s() const { return s_; }

    double kernel_for_offset(long long dx, long long dy) const {
        return kernel_by_r2_[static_cast<std::size_t>(dx * dx + dy * dy)];
    }

    // Gagliardo double sum over ordered box pairs plus optional exterior
    // tail, for values `v` that vanish off the mask.
    double energy(const std::vector<double>& v, bool tail, int threads = 1) const {
        const double p = p_;
        const double pair_part = block_sum_parallel(pairs_.size(), threads, [&](std::size_t k) {
            const Pair& pr = pairs_[k];
            return pr.w * detail::abs_pow(v[static_cast<std::size_t>(pr.a)] - v[static_cast<std::size_t>(pr.b)], p);
        });
        const double single_part = block_sum(inside_.size(), [&](std::size_t k) {
            return complement_mass_[k] * detail::abs_pow(v[static_cast<std::size_t>(inside_[k])], p);
        });
        const double h2d = std::pow(lat_.cell_measure(), 2.0);
        double total = h2d * 2.0 * (pair_part + single_part);
        if (tail) total += tail_sum(v);
        return total;
    }

    // d/du_i of energy(), restricted to mask nodes (packed in inside() order).
    void gradient_masked(const std::vector<double>& v, bool tail, std::vector<double>& out) const {
        const double p = p_;
        const std::size_t m = inside_.size();
        out.assign(m, 0.0);
        std::vector<std::size_t> pos(static_cast<std::size_t>(lat_.nodes()), 0);
        for (std::size_t k = 0; k < m; ++k) pos[static_cast<std::size_t>(inside_[k])] = k;
        const double h2d = std::pow(lat_.cell_measure(), 2.0);
        for (const Pair& pr : pairs_) {
            const double g = pr.w * detail::signed_pow(v[static_cast<std::size_t>(pr.a)] -
                                                       v[static_cast<std::size_t>(pr.b)], p);
            out[pos[static_cast<std::size_t>(pr.a)]] += g;
            out[pos[static_cast<std::size_t>(pr.b)]] -= g;
        }
        for (std::size_t k = 0; k < m; ++k) {
            const double val = v[static_cast<std::size_t>(inside_[k])];
            double g = out[k] + complement_mass_[k] * detail::signed_pow(val, p);
            g *= 2.0 * p * h2d;
            if (tail && val != 0.0) {
                const double kap = tail_kappa(lat_, inside_[k], p_, s_);
                if (std::isinf(kap))
                    throw energy_error("nonlocal tail: support touches the box boundary");
                g += p * lat_.cell_measure() * kap * detail::signed_pow(val, p);
            }
            out[k] = g;
        }
    }

    double tail_sum(const std::vector<double>& v) const {
        return lat_.cell_measure() * block_sum(inside_.size(), [&](std::size_t k) {
            const double val = v[static_cast<std::size_t>(inside_[k])];
            if (val == 0.0) return 0.0;
            const double kap = tail_kappa(lat_, inside_[k], p_, s_);
            if (std::isinf(kap))
                throw energy_error("nonlocal tail: support touches the box boundary");
            return kap * detail::abs_pow(val, p_);
        });
    }

private:
    Lattice lat_;
    std::vector<int> inside_;
    double p_, s_;
    std::vector<double> kernel_by_r2_;
    std::vector<Pair> pairs_;
    std::vector<double> complement_mass_;
};

// h^(2d) * sum over ordered box pairs |u_i - u_j|^p / |x_i - x_j|^(d+ps),
// plus (with the tail on) h^d * sum_i |u_i|^p * kappa_box(x_i).
inline double gagliardo_p(const GridFunction& u, const OperatorParams& par) {
    par.validate();
    NonlocalKernel k(u.lattice(), u.support_mask(), par.p, par.s);
    return k.energy(u.values(), par.tail_enabled);
}

inline EnergyBreakdown rayleigh_quotient(const GridFunction& u, const OperatorParams& par) {
    par.validate();
    EnergyBreakdown br;
    br.lp_norm_p = lp_norm_p(u, par.p);
    if (!(br.lp_norm_p > 0.0))
        throw energy_error("rayleigh quotient: function vanishes identically");
    br.local_energy = local_energy(u, par);
    br.nonlocal_energy = gagliardo_p(u, par);
    br.rayleigh = (par.a * br.local_energy + par.b * br.nonlocal_energy) / br.lp_norm_p;
    return br;
}

// Gradient of  a*local_energy + b*gagliardo_p  with respect to the node
// values, reported at every box node (entries off the support mask describe
// how the energy would react to support growth; solvers project them away).
inline std::vector<double> energy_gradient(const GridFunction& u, const OperatorParams& par) {
    par.validate();
    const Lattice& lat = u.lattice();
    const auto& v = u.values();
    const int n = lat.nodes();
    const double p = par.p;
    std::vector<double> grad(static_cast<std::size_t>(n), 0.0);

    if (par.a != 0.0) {
        const double wl = par.a * p * std::pow(lat.h, lat.dim - p);
        if (par.local_form == OperatorParams::LocalForm::edge) {
            for (int idx = 0; idx < n; ++idx) {
                const auto ij = lat.unpack(idx);
                const double c = v[static_cast<std::size_t>(idx)];
                double acc = 0.0;
                const int sx[4] = {1, -1, 0, 0}, sy[4] = {0, 0, 1, -1};
                const int ndirs = lat.dim == 1 ? 2 : 4;
                for (int d = 0; d < ndirs; ++d) {
                    const int jx = ij[0] + sx[d], jy = ij[1] + sy[d];
                    const double nb = lat.in_box(jx, jy) ? v[static_cast<std::size_t>(lat.pack(jx, jy))] : 0.0;
                    acc += detail::signed_pow(c - nb, p);
                }
                grad[static_cast<std::size_t>(idx)] += wl * acc;
            }
        } else {
            // d/du_m of h^d * sum_i g_i^(p/2): node i = m contributes through
            // all forward differences at m; node i = m - e_k through one.
            const double inv_h2 = 1.0 / (lat.h * lat.h);
            std::vector<double> gp(static_cast<std::size_t>(n), 0.0); // (p/2) g^(p/2-1)
            for (int idx = 0; idx < n; ++idx) {
                const auto ij = lat.unpack(idx);
                const double c = v[static_cast<std::size_t>(idx)];
                const double fx = (ij[0] + 1 < lat.nx() ? v[static_cast<std::size_t>(lat.pack(ij[0] + 1, ij[1]))] : 0.0) - c;
                double g2 = fx * fx * inv_h2;
                if (lat.dim == 2) {
                    const double fy = (ij[1] + 1 < lat.ny() ? v[static_cast<std::size_t>(lat.pack(ij[0], ij[1] + 1))] : 0.0) - c;
                    g2 += fy * fy * inv_h2;
                }
                gp[static_cast<std::size_t>(idx)] = g2 == 0.0 ? 0.0 : 0.5 * p * std::pow(g2, 0.5 * p - 1.0);
            }
            const double hd = std::pow(lat.h, static_cast<double>(lat.dim));
            for (int idx = 0; idx < n; ++idx) {
                const auto ij = lat.unpack(idx);
                const double c = v[static_cast<std::size_t>(idx)];
                double acc = 0.0;
                const double fx = (ij[0] + 1 < lat.nx() ? v[static_cast<std::size_t>(lat.pack(ij[0] + 1, ij[1]))] : 0.0) - c;
                acc += gp[static_cast<std::size_t>(idx)] * (-2.0 * fx * inv_h2);
                if (ij[0] > 0) {
                    const double bx = c - v[static_cast<std::size_t>(lat.pack(ij[0] - 1, ij[1]))];
                    acc += gp[static_cast<std::size_t>(lat.pack(ij[0] - 1, ij[1]))] * (2.0 * bx * inv_h2);
                }
                if (lat.dim == 2) {
                    const double fy = (ij[1] + 1 < lat.ny() ? v[static_cast<std::size_t>(lat.pack(ij[0], ij[1] + 1))] : 0.0) - c;
                    acc += gp[static_cast<std::size_t>(idx)] * (-2.0 * fy * inv_h2);
                    if (ij[1] > 0) {
                        const double by = c - v[static_cast<std::size_t>(lat.pack(ij[0], ij[1] - 1))];
                        acc += gp[static_cast<std::size_t>(lat.pack(ij[0], ij[1] - 1))] * (2.0 * by * inv_h2);
                    }
                }
                acc *= hd;
                // Ghost layer below the box: |u|^p terms for border nodes.
                if (ij[0] == 0) acc += p * std::pow(lat.h, lat.dim - p) * detail::signed_pow(c, p);
                if (lat.dim == 2 && ij[1] == 0) acc += p * std::pow(lat.h, lat.dim - p) * detail::signed_pow(c, p);
                grad[static_cast<std::size_t>(idx)] += par.a * acc;
            }
        }
    }

    // Nonlocal part: 2p h^(2d) sum_j w_ij |u_i - u_j|^(p-2)(u_i - u_j) over
    // box nodes j; functions vanish off the mask, so only mask nodes j
    // contribute a nonzero difference against off-mask nodes i.
    NonlocalKernel k(lat, u.support_mask(), par.p, par.s);
    const auto& inside = k.inside();
    const double h2d = std::pow(lat.cell_measure(), 2.0);
    for (int idx = 0; idx < n; ++idx) {
        const auto ij = lat.unpack(idx);
        const double c = v[static_cast<std::size_t>(idx)];
        double acc = block_sum(inside.size(), [&](std::size_t t) {
            const int jdx = inside[t];
            if (jdx == idx) return 0.0;
            const auto jj = lat.unpack(jdx);
            const double w = k.kernel_for_offset(ij[0] - jj[0], ij[1] - jj[1]);
            return w * detail::signed_pow(c - v[static_cast<std::size_t>(jdx)], p);
        });
        if (u.support_mask().inside(idx)) {
            const std::size_t kpos = static_cast<std::size_t>(
                std::lower_bound(inside.begin(), inside.end(), idx) - inside.begin());
            acc += k.complement_mass()[kpos] * detail::signed_pow(c, p);
        }
        double g = par.b * 2.0 * p * h2d * acc;
        if (par.tail_enabled && u.support_mask().inside(idx)) {
            const double kap = tail_kappa(lat, idx, par.p, par.s);
            if (std::isinf(kap) && c != 0.0)
                throw energy_error("nonlocal tail: support touches the box boundary");
            if (!std::isinf(kap))
                g += par.b * p * lat.cell_measure() * kap * detail::signed_pow(c, p);
        }
        grad[static_cast<std::size_t>(idx)] += g;
    }
    return grad;
}

} // namespace mixedeig
