#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "mixedeig/energy.hpp"
#include "mixedeig/errors.hpp"
#include "mixedeig/grid_function.hpp"
#include "mixedeig/lattice.hpp"

namespace mixedeig {

struct SolverOptions {
    double tol_rel = 1e-8;         // relative convergence tolerance
    int max_iter = 5000;
    double step_init = 1.0;        // first trial step of the descent solver
    double backtrack_factor = 0.5; // step shrink while the Rayleigh value does not drop
    double residual_tol = 1e-4;    // stationarity bound for the descent solver
    std::uint64_t seed = 0;        // nonzero: jitter the descent start profile
    int threads = 1;

    static SolverOptions p2_defaults() { return SolverOptions{}; }
    static SolverOptions descent_defaults() {
        SolverOptions o;
        o.tol_rel = 1e-6;
        return o;
    }
};

struct EigenResult {
    double lambda = 0.0;
    GridFunction eigenfunction; // normalized to ||u||_p = 1, nonnegative
    int iterations = 0;
    double residual = 0.0;      // relative stationarity measure at the last iterate
    bool converged = false;
    double interior_min = 0.0;  // smallest eigenfunction value on the mask
};

// Stiffness matrix of the p = 2 energy on the inside nodes (ordered by node
// index): u^T M u = a * local_energy + b * gagliardo_2 for every function
// supported on the mask. The eigenvalue problem for the h^d-weighted L2 norm
// is then M v = lambda h^d v.
inline Eigen::MatrixXd assemble_p2_matrix(const Lattice& lat, const DomainMask& mask,
                                          const OperatorParams& par) {
    par.validate();
    if (par.p != 2.0) throw energy_error("assemble_p2_matrix: requires p = 2");
    if (mask.lattice() != lat) throw geometry_error("assemble_p2_matrix: mask/lattice mismatch");
    if (mask.empty()) throw geometry_error("assemble_p2_matrix: empty mask");

    const NonlocalKernel kern(lat, mask, par.p, par.s);
    const auto& inside = kern.inside();
    const int m = static_cast<int>(inside.size());
    std::vector<int> pos(static_cast<std::size_t>(lat.nodes()), -1);
    for (int k = 0; k < m; ++k) pos[static_cast<std::size_t>(inside[static_cast<std::size_t>(k)]]] = k;

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
    const double h2d = std::pow(lat.cell_measure(), 2.0);

    // Nonlocal part: diag 2 h^2d (sum_j w_ij + K_i), off-diag -2 h^2d w_ij.
    for (const auto& pr : kern.pairs()) {
        const int ia = pos[static_cast<std::size_t>(pr.a)];
        const int ib = pos[static_cast<std::size_t>(pr.b)];
        const double w = 2.0 * h2d * par.b * pr.w;
        M(ia, ib) -= w;
        M(ib, ia) -= w;
        M(ia, ia) += w;
        M(ib, ib) += w;
    }
    for (int k = 0; k < m; ++k) {
        M(k, k) += 2.0 * h2d * par.b * kern.complement_mass()[static_cast<std::size_t>(k)];
        if (par.tail_enabled) {
            const double kap = tail_kappa(lat, inside[static_cast<std::size_t>(k)], par.p, par.s);
            if (std::isinf(kap))
                throw energy_error("assemble_p2_matrix: mask touches the box boundary with tail on");
            M(k, k) += par.b * lat.cell_measure() * kap;
        }
    }

    // Local part: every inside node carries 2*dim lattice edges; edges to
    // off-mask or off-box neighbors keep only the diagonal contribution.
    if (par.a != 0.0) {
        const double wl = par.a * std::pow(lat.h, lat.dim - 2.0);
        const int sx[4] = {1, -1, 0, 0}, sy[4] = {0, 0, 1, -1};
        const int ndirs = lat.dim == 1 ? 2 : 4;
        for (int k = 0; k < m; ++k) {
            const auto ij = lat.unpack(inside[static_cast<std::size_t>(k)]);
            M(k, k) += wl * 2.0 * lat.dim;
            for (int d = 0; d < ndirs; ++d) {
                const int jx = ij[0] + sx[d], jy = ij[1] + sy[d];
                if (!lat.in_box(jx, jy)) continue;
                const int q = pos[static_cast<std::size_t>(lat.pack(jx, jy))];
                if (q >= 0) M(k, q) -= wl;
            }
        }
    }
    return M;
}

namespace detail {

inline std::vector<double> descent_start(const DomainMask& mask, std::uint64_t seed) {
    const auto depth = erosion_depth(mask);
    std::vector<double> u(depth.size(), 0.0);
    for (std::size_t i = 0; i < depth.size(); ++i) u[i] = static_cast<double>(depth[i]);
    if (seed != 0) {
        // Optional start jitter: keeps the profile positive, exercises
        // robustness of the descent against perturbed initializations.
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> jit(0.0, 0.05);
        for (std::size_t i = 0; i < u.size(); ++i)
            if (u[i] > 0.0) u[i] *= 1.0 + jit(rng);
    }
    return u;
}

inline GridFunction embed_normalized(const Lattice& lat, const DomainMask& mask,
                                     std::vector<double> vbox, double p) {
    GridFunction g(lat, mask, std::move(vbox));
    const double np = lp_norm_p(g, p);
    if (!(np > 0.0)) throw solver_error("eigensolver: candidate function vanished");
    g.scale(std::pow(np, -1.0 / p));
    return g;
}

} // namespace detail

// Smallest eigenpair of the p = 2 quadratic form by inverse power iteration
// with a dense Cholesky factorization. M is a symmetric M-matrix, so the
// iteration started from a positive profile keeps a nonnegative sign
// pattern and converges to the ground state.
inline EigenResult solve_p2(const Lattice& lat, const DomainMask& mask, const OperatorParams& par,
                            const SolverOptions& opts = SolverOptions::p2_defaults()) {
    par.validate();
    const Eigen::MatrixXd M = assemble_p2_matrix(lat, mask, par);
    const int m = static_cast<int>(M.rows());
    const auto inside = mask.inside_indices();

    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success)
        throw solver_error("solve_p2: Cholesky factorization failed (matrix not SPD?)");

    const auto depth = erosion_depth(mask);
    Eigen::VectorXd v(m);
    for (int k = 0; k < m; ++k)
        v(k) = static_cast<double>(depth[static_cast<std::size_t>(inside[static_cast<std::size_t>(k)])]);
    v.normalize();

    double lambda_m = v.dot(M * v);
    double resid = std::numeric_limits<double>::infinity();
    int it = 0;
    bool converged = false;
    for (; it < opts.max_iter; ++it) {
        v = llt.solve(v);
        v.normalize();
        const Eigen::VectorXd Mv = M * v;
        lambda_m = v.dot(Mv);
        resid = (Mv - lambda_m * v).norm();
        if (resid <= opts.tol_rel * lambda_m) {
            converged = true;
            ++it;
            break;
        }
    }

    if (v.sum() < 0.0) v = -v;
    const double hd = lat.cell_measure();
    std::vector<double> box(static_cast<std::size_t>(lat.nodes()), 0.0);
    for (int k = 0; k < m; ++k)
        box[static_cast<std::size_t>(inside[static_cast<std::size_t>(k)])] = v(k);

    EigenResult res;
    res.lambda = lambda_m / hd;
    res.eigenfunction = detail::embed_normalized(lat, mask, std::move(box), 2.0);
    res.iterations = it;
    res.residual = resid / lambda_m;
    res.converged = converged;
    res.interior_min = res.eigenfunction.min_inside();
    return res;
}

// Minimizes the Rayleigh quotient for general p > 1 by normalized projected
// gradient descent: u <- normalize(|u - eta g|) with g the energy gradient
// restricted to the mask. The trial step is seeded with a Barzilai-Borwein
// estimate and backtracks until the Rayleigh value strictly decreases, so
// the Rayleigh sequence is monotone by construction. Converged means: the
// relative per-step decrease fell below tol_rel and the projected
// stationarity residual is below residual_tol.
inline EigenResult solve_descent(const Lattice& lat, const DomainMask& mask,
                                 const OperatorParams& par,
                                 const SolverOptions& opts = SolverOptions::descent_defaults()) {
    par.validate();
    if (mask.lattice() != lat) throw geometry_error("solve_descent: mask/lattice mismatch");
    if (mask.empty()) throw geometry_error("solve_descent: empty mask");

    const NonlocalKernel kern(lat, mask, par.p, par.s);
    const auto& inside = kern.inside();
    const std::size_t m = inside.size();
    const double p = par.p;

    auto energy_of = [&](const GridFunction& g) {
        return par.a * local_energy(g, par) +
               par.b * kern.energy(g.values(), par.tail_enabled, opts.threads);
    };
    auto masked_gradient = [&](const GridFunction& g, std::vector<double>& out) {
        kern.gradient_masked(g.values(), par.tail_enabled, out);
        for (auto& x : out) x *= par.b;
        if (par.a != 0.0) {
            // Local edge gradient on the mask: p |du|^(p-2) du per incident edge.
            const double wl = par.a * p * std::pow(lat.h, lat.dim - p);
            const int sx[4] = {1, -1, 0, 0}, sy[4] = {0, 0, 1, -1};
            const int ndirs = lat.dim == 1 ? 2 : 4;
            const auto& v = g.values();
            for (std::size_t k = 0; k < m; ++k) {
                const auto ij = lat.unpack(inside[k]);
                const double c = v[static_cast<std::size_t>(inside[k])];
                double acc = 0.0;
                for (int d = 0; d < ndirs; ++d) {
                    const int jx = ij[0] + sx[d], jy = ij[1] + sy[d];
                    const double nb = lat.in_box(jx, jy) ? v[static_cast<std::size_t>(lat.pack(jx, jy))] : 0.0;
                    acc += detail::signed_pow(c - nb, p);
                }
                out[k] += wl * acc;
            }
        }
    };

    if (par.a != 0.0 && par.local_form != OperatorParams::LocalForm::edge)
        throw solver_error("solve_descent: only the edge local form has a descent gradient here");

    GridFunction u = detail::embed_normalized(lat, mask, detail::descent_start(mask, opts.seed), p);
    double R = energy_of(u);

    std::vector<double> g(m), g_prev(m), u_in(m), u_prev(m);
    auto restrict_in = [&](const GridFunction& fn, std::vector<double>& out) {
        for (std::size_t k = 0; k < m; ++k) out[k] = fn[inside[k]];
    };
    masked_gradient(u, g);
    restrict_in(u, u_in);

    auto stationarity = [&]() {
        // || g - lambda dN ||_2 / (lambda ||dN||_2) with dN the gradient of
        // the p-norm constraint at u.
        double gn = 0.0, dn = 0.0;
        const double hd = lat.cell_measure();
        for (std::size_t k = 0; k < m; ++k) {
            const double dN = p * hd * detail::signed_pow(u_in[k], p);
            const double t = g[k] - R * dN;
            gn += t * t;
            dn += dN * dN;
        }
        return std::sqrt(gn) / std::max(R * std::sqrt(dn), 1e-300);
    };

    EigenResult res;
    double eta_prev = opts.step_init;
    bool converged = false;
    double resid = stationarity();
    int accepted = 0;

    for (int it = 0; it < opts.max_iter; ++it) {
        // Barzilai-Borwein step seed from the last accepted move.
        double eta = eta_prev;
        if (accepted > 0) {
            double ss = 0.0, sy = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                const double sk = u_in[k] - u_prev[k];
                ss += sk * sk;
                sy += sk * (g[k] - g_prev[k]);
            }
            if (sy != 0.0 && std::isfinite(sy)) eta = std::abs(ss / sy);
            if (!(eta > 1e-18) || !std::isfinite(eta)) eta = eta_prev;
        }

        bool moved = false;
        GridFunction trial;
        double R_try = R;
        for (int bt = 0; bt < 60; ++bt) {
            std::vector<double> w(static_cast<std::size_t>(lat.nodes()), 0.0);
            for (std::size_t k = 0; k < m; ++k)
                w[static_cast<std::size_t>(inside[k])] = std::abs(u_in[k] - eta * g[k]);
            double norm_p = 0.0;
            try {
                trial = detail::embed_normalized(lat, mask, std::move(w), p);
                norm_p = 1.0;
            } catch (const solver_error&) {
                eta *= opts.backtrack_factor;
                continue;
            }
            (void)norm_p;
            R_try = energy_of(trial);
            if (R_try < R * (1.0 - 1e-15)) {
                moved = true;
                break;
            }
            eta *= opts.backtrack_factor;
        }

        if (!moved) {
            resid = stationarity();
            converged = resid <= opts.residual_tol;
            break;
        }

        const double rel_dec = (R - R_try) / R;
        u = std::move(trial);
        g_prev.swap(g);
        u_prev.swap(u_in);
        masked_gradient(u, g);
        restrict_in(u, u_in);
        R = R_try;
        eta_prev = eta;
        ++accepted;

        if (rel_dec < opts.tol_rel) {
            resid = stationarity();
            if (resid <= opts.residual_tol) {
                converged = true;
                break;
            }
        }
    }
    if (!converged) resid = stationarity();

    res.lambda = R;
    res.eigenfunction = u;
    res.iterations = accepted;
    res.residual = resid;
    res.converged = converged;
    res.interior_min = u.min_inside();
    return res;
}

// Route by exponent: exact quadratic path at p = 2, descent otherwise.
inline EigenResult solve_ground_state(const Lattice& lat, const DomainMask& mask,
                                      const OperatorParams& par, const SolverOptions& opts) {
    return par.p == 2.0 ? solve_p2(lat, mask, par, opts) : solve_descent(lat, mask, par, opts);
}

} // namespace mixedeig
