#pragma once

// Quadrature-based finite-difference coefficients of the discrete nonlocal
// operator
//
//   L_{delta,h} u_k = sum_m a_{k-m} (u_k - u_m) = sum_{|m|_inf <= L} c_m u_{k+m},
//   a_m = (1 / w(h m)) int_{B_delta} Phi_{m,p}(s) w(s) gamma(s) ds,
//
// where Phi_{m,p} is the (bi-)p-th degree Lagrange basis function of node m on
// the (2L/p)^d equal cells covering the horizon.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "nlwave/errors.hpp"
#include "nlwave/hash.hpp"
#include "nlwave/kernels.hpp"
#include "nlwave/lattice.hpp"
#include "nlwave/quadrature.hpp"

namespace nlwave {

struct stencil {
    int p = 1;
    int L = 0;
    int dim = 1;
    double h = 0.0;
    double quad_tol = 0.0;
    kernel_spec kernel;
    std::vector<double> a;   // dense over [-L, L]^d
    std::vector<double> c;
    double S = 0.0;          // CFL constant 2((2L+1)^d - 1) |a|_inf

    int width() const { return 2 * L + 1; }
    int size() const { return dim == 1 ? width() : width() * width(); }
    int slot(const multi_index& m) const {
        return dim == 1 ? m[0] + L : (m[0] + L) * width() + (m[1] + L);
    }
    multi_index offset(int i) const {
        if (dim == 1) return {i - L, 0};
        return {i / width() - L, i % width() - L};
    }
    bool reaches(const multi_index& m) const { return inf_norm(m, dim) <= L; }
    double a_at(const multi_index& m) const { return reaches(m) ? a[slot(m)] : 0.0; }
    double c_at(const multi_index& m) const { return reaches(m) ? c[slot(m)] : 0.0; }

    double a_max() const {
        double v = 0.0;
        for (double x : a) v = std::max(v, std::abs(x));
        return v;
    }
    bool nonnegative() const {
        return std::all_of(a.begin(), a.end(), [](double x) { return x >= 0.0; });
    }
    /// max |a_m| over the outermost shell |m|_inf = L
    double shell_magnitude() const {
        double v = 0.0;
        for (int i = 0; i < size(); ++i)
            if (inf_norm(offset(i), dim) == L) v = std::max(v, std::abs(a[i]));
        return v;
    }
    double c_l1() const {
        double v = 0.0;
        for (double x : c) v += std::abs(x);
        return v;
    }

    std::uint64_t hash() const {
        content_hash hsh;
        hsh.add(to_string(kernel.family)).add(kernel.delta).add(kernel.nu).add(kernel.amplitude)
            .add(kernel.rate).add(h).add(p).add(dim).add(L).add(quad_tol)
            .add(std::span<const double>(a));
        return hsh.value();
    }

    /// Recompute c and S from a.
    void derive() {
        c.assign(a.size(), 0.0);
        double sum = 0.0;
        for (int i = 0; i < size(); ++i) {
            if (i == slot({0, 0})) continue;
            c[i] = -a[i];
            sum += a[i];
        }
        c[slot({0, 0})] = sum;
        double cells = std::pow(2.0 * L + 1.0, dim) - 1.0;
        S = 2.0 * cells * a_max();
    }
};

/// Stencil from an explicit coefficient table (a_0 forced to zero).
inline stencil stencil_from_coefficients(int dim, int L, double h, std::vector<double> a, int p = 1) {
    stencil st;
    st.dim = dim;
    st.L = L;
    st.h = h;
    st.p = p;
    if (static_cast<int>(a.size()) != st.size())
        throw shape_error("coefficient table has the wrong size");
    st.a = std::move(a);
    st.a[st.slot({0, 0})] = 0.0;
    st.derive();
    return st;
}

namespace detail {

/// Lagrange basis on nodes 0..p evaluated at local coordinate t.
inline void lagrange_basis(int p, double t, double* out) {
    for (int j = 0; j <= p; ++j) {
        double v = 1.0;
        for (int k = 0; k <= p; ++k)
            if (k != j) v *= (t - k) / static_cast<double>(j - k);
        out[j] = v;
    }
}

} // namespace detail

/// Build the coefficient tables. Only the closed positive quadrant is
/// integrated; the remaining entries follow from the reflection symmetry of
/// the kernel and the cell layout, so a_m = a_{-m} holds exactly.
inline stencil build_stencil(const kernel_spec& kernel, const grid_spec& grid, int p,
                             double quad_tol) {
    kernel.validate();
    if (p < 1) throw config_error("interpolation degree p must be >= 1");
    if (kernel.dim != grid.dim) throw config_error("kernel and grid dimensions differ");
    if (std::abs(kernel.delta - grid.delta) > 1e-12 * grid.delta)
        throw config_error("kernel horizon and grid horizon differ");
    if (grid.L % p != 0)
        throw config_error(detail::concat("L = ", grid.L, " is not a multiple of p = ", p));

    stencil st;
    st.p = p;
    st.L = grid.L;
    st.dim = grid.dim;
    st.h = grid.h;
    st.quad_tol = quad_tol;
    st.kernel = kernel;
    st.a.assign(st.size(), 0.0);

    const int cells = grid.L / p;
    const double h = grid.h;
    const int nloc = p + 1;
    const int ncomp = grid.dim == 1 ? nloc : nloc * nloc;

    quad::adaptive_options opt;
    opt.order = std::max(2 * p + 2, 10);
    opt.tol = quad_tol;

    // quadrant integrals Q_m, m >= 0 componentwise
    std::vector<double> quadrant(static_cast<std::size_t>(grid.dim == 1 ? grid.L + 1
                                                                        : (grid.L + 1) * (grid.L + 1)),
                                 0.0);
    auto qslot = [&](int m0, int m1) { return grid.dim == 1 ? m0 : m0 * (grid.L + 1) + m1; };

    const int ncells = grid.dim == 1 ? cells : cells * cells;
    std::vector<std::vector<double>> cell_values(ncells);

#pragma omp parallel for schedule(dynamic)
    for (int ci = 0; ci < ncells; ++ci) {
        const int i = grid.dim == 1 ? ci : ci / cells;
        const int j = grid.dim == 1 ? 0 : ci % cells;
        const bool origin_cell = (i == 0 && j == 0);
        quad::box b{grid.dim,
                    {i * p * h, grid.dim == 2 ? j * p * h : 0.0},
                    {(i + 1) * p * h, grid.dim == 2 ? (j + 1) * p * h : 0.0}};
        auto integrand = [&](const double* s, double* out) {
            double wg = weight_eval(std::span<const double>(s, grid.dim)) *
                        kernel_eval(kernel, std::span<const double>(s, grid.dim));
            double bx[16], by[16];
            detail::lagrange_basis(p, s[0] / h - i * p, bx);
            if (grid.dim == 1) {
                for (int a = 0; a < nloc; ++a) out[a] = bx[a] * wg;
                if (origin_cell) out[0] = 0.0;   // node 0 carries no coefficient
                return;
            }
            detail::lagrange_basis(p, s[1] / h - j * p, by);
            for (int a = 0; a < nloc; ++a)
                for (int c = 0; c < nloc; ++c) out[a * nloc + c] = bx[a] * by[c] * wg;
            if (origin_cell) out[0] = 0.0;
        };
        try {
            cell_values[ci] = quad::integrate_adaptive(integrand, b, ncomp, opt).value;
        } catch (const quadrature_failure& e) {
            throw quadrature_failure(detail::concat("stencil cell (", i, ",", j, "): ", e.what()),
                                     e.achieved_tolerance);
        }
    }

    for (int ci = 0; ci < ncells; ++ci) {
        const int i = grid.dim == 1 ? ci : ci / cells;
        const int j = grid.dim == 1 ? 0 : ci % cells;
        for (int a = 0; a < nloc; ++a) {
            if (grid.dim == 1) {
                quadrant[qslot(i * p + a, 0)] += cell_values[ci][a];
                continue;
            }
            for (int c = 0; c < nloc; ++c)
                quadrant[qslot(i * p + a, j * p + c)] += cell_values[ci][a * nloc + c];
        }
    }

    // unfold to the full table
    for (int idx = 0; idx < st.size(); ++idx) {
        multi_index m = st.offset(idx);
        if (m[0] == 0 && m[1] == 0) continue;
        int m0 = std::abs(m[0]), m1 = std::abs(m[1]);
        double integral;
        if (grid.dim == 1) {
            integral = quadrant[qslot(m0, 0)];
        } else {
            int mult = (m0 == 0 ? 2 : 1) * (m1 == 0 ? 2 : 1);
            integral = mult * 0.5 * (quadrant[qslot(m0, m1)] + quadrant[qslot(m1, m0)]);
        }
        double hm[2] = {h * m[0], h * m[1]};
        st.a[idx] = integral / weight_eval(std::span<const double>(hm, grid.dim));
    }
    st.derive();
    return st;
}

/// sum_{|m|_inf <= L} c_m u_{k+m}
inline double apply_operator(const stencil& st, const lattice_field& u, const multi_index& k) {
    double acc = 0.0;
    for (int i = 0; i < st.size(); ++i) {
        multi_index m = st.offset(i);
        if (st.c[i] == 0.0 && !(m[0] == 0 && m[1] == 0)) continue;
        acc += st.c[i] * u.value_or_throw(k + m);
    }
    return acc;
}

/// Continuum operator L_delta u(x) in its symmetrised form
/// (1/2) int_{B_delta} (2u(x) - u(x+s) - u(x-s)) gamma(s) ds.
template <class U>
double continuum_operator(const kernel_spec& k, const U& u, std::span<const double> x, double tol) {
    const int d = k.dim;
    auto f = [&](const double* s) {
        double xp[2] = {x[0] + s[0], d == 2 ? x[1] + s[1] : 0.0};
        double xm[2] = {x[0] - s[0], d == 2 ? x[1] - s[1] : 0.0};
        double r2 = s[0] * s[0] + (d == 2 ? s[1] * s[1] : 0.0);
        double diff = 2.0 * u(x) - u(std::span<const double>(xp, d)) - u(std::span<const double>(xm, d));
        return diff * radial_profile(k, std::sqrt(r2));
    };
    quad::adaptive_options opt;
    opt.tol = tol / (1 << d);
    opt.order = 12;
    // even integrand: integrate one quadrant (first coordinate >= 0, second >= 0)
    // and use the 2^d reflection images. For d = 2 the integrand is only even
    // under s -> -s, so the two half-quadrants with opposite sign of s1 s2 are
    // both needed.
    if (d == 1) {
        return quad::integrate(f, quad::box{1, {0.0, 0.0}, {k.delta, 0.0}}, opt);
    }
    double q1 = quad::integrate(f, quad::box{2, {0.0, 0.0}, {k.delta, k.delta}}, opt);
    double q2 = quad::integrate(f, quad::box{2, {0.0, -k.delta}, {k.delta, 0.0}}, opt);
    return q1 + q2;
}

struct probe_result {
    std::vector<double> h;
    std::vector<double> error;
    double slope = 0.0;
};

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct probe_options {
    double window = 1.0;       // probe nodes satisfy |x_k|_inf <= window
    double quad_tol = 1e-14;   // stencil build tolerance
    double oracle_tol = 1e-12; // continuum oracle tolerance
    double floor = 1e-11;      // below this the ladder is roundoff dominated
};

/// Max-norm truncation error of L_{delta,h} against the continuum operator on
/// a ladder of mesh sizes, and the fitted convergence slope.
template <class U>
probe_result truncation_order_probe(const kernel_spec& k, int p, const U& u,
                                    std::span<const double> h_ladder, const probe_options& opt = {}) {
    probe_result res;
    for (double h : h_ladder) {
        grid_spec g = grid_spec::make(k.dim, h, k.delta, opt.window + k.delta + h);
        stencil st = build_stencil(k, g, p, opt.quad_tol);
        const int n = static_cast<int>(std::floor(opt.window / h + 1e-9));
        double err = 0.0;
        auto probe_at = [&](const multi_index& node) {
            double x[2] = {node[0] * h, node[1] * h};
            std::span<const double> xs(x, k.dim);
            double disc = 0.0;
            const double ux = u(xs);
            for (int i = 0; i < st.size(); ++i) {
                if (st.a[i] == 0.0) continue;
                multi_index m = st.offset(i);
                double y[2] = {x[0] + m[0] * h, x[1] + m[1] * h};
                disc += st.a[i] * (ux - u(std::span<const double>(y, k.dim)));
            }
            double exact = continuum_operator(k, u, xs, opt.oracle_tol);
            err = std::max(err, std::abs(disc - exact));
        };
        for (int i = -n; i <= n; ++i) {
            if (k.dim == 1) {
                probe_at({i, 0});
            } else {
                for (int j = -n; j <= n; ++j) probe_at({i, j});
            }
        }
        res.h.push_back(h);
        res.error.push_back(err);
    }
    for (std::size_t i = 1; i < res.error.size(); ++i) {
        bool finer = res.h[i] < res.h[i - 1];
        if (finer && res.error[i] >= res.error[i - 1] && res.error[i] > opt.floor)
            throw probe_inconclusive_error("truncation error ladder is not monotone", res.h,
                                           res.error);
    }
    res.slope = loglog_slope(res.h, res.error);
    return res;
}

} // namespace nlwave
