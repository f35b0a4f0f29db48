#pragma once

// z-domain DtD map for the 2D exterior problem through the lattice Green's
// function G (s G_k + sum_m c_m G_{k+m} = delta_{k,0}) and a single-layer
// potential supported on the inner boundary layer.

#include <Eigen/Dense>
#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "nlwave/errors.hpp"
#include "nlwave/lattice.hpp"
#include "nlwave/stencil.hpp"
#include "nlwave/ztransform.hpp"

namespace nlwave {

using cmatrix = Eigen::MatrixXcd;

/// sum_m c_m e^{i m . xi}; the imaginary part vanishes for symmetric c and is
/// checked against 1e-13 |c|_1.
inline double fourier_symbol(const stencil& st, double xi1, double xi2) {
    if (st.dim != 2) throw config_error("fourier_symbol expects a 2D stencil");
    cplx acc = 0.0;
    for (int i = 0; i < st.size(); ++i) {
        if (st.c[i] == 0.0) continue;
        multi_index m = st.offset(i);
        acc += st.c[i] * std::polar(1.0, m[0] * xi1 + m[1] * xi2);
    }
    if (std::abs(acc.imag()) > 1e-13 * st.c_l1())
        throw numerical_error("Fourier symbol has an imaginary part; stencil is not symmetric");
    return acc.real();
}

struct lattice_greens {
    cplx s;
    int max_offset = 0;
    int n_quad = 0;
    std::vector<cplx> table;   // (2 max_offset + 1)^2, row-major in (k1, k2)

    int side() const { return 2 * max_offset + 1; }
    bool covers(const multi_index& k) const {
        return std::abs(k[0]) <= max_offset && std::abs(k[1]) <= max_offset;
    }
    cplx operator()(const multi_index& k) const {
        if (!covers(k))
            throw out_of_range_error(detail::concat("Green's table has no offset (", k[0], ",", k[1], ")"));
        return table[(k[0] + max_offset) * side() + (k[1] + max_offset)];
    }
};

namespace detail {

/// 2D in-place backward DFT of an n x n row-major complex array.
inline void fft2_backward(std::vector<cplx>& data, int n) {
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
        plan = fftw_plan_dft_2d(n, n, ptr, ptr, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
}

/// Symbol values on the n x n periodic grid xi = 2 pi (a, b) / n, cached per
/// stencil and n (shared across contour nodes).
class symbol_grid_cache {
public:
    std::shared_ptr<const std::vector<double>> get(const stencil& st, int n) {
        std::lock_guard lock(mutex_);
        auto key = std::make_pair(st.hash(), n);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        std::vector<cplx> grid(static_cast<std::size_t>(n) * n, 0.0);
        for (int i = 0; i < st.size(); ++i) {
            multi_index m = st.offset(i);
            int a = ((m[0] % n) + n) % n, b = ((m[1] % n) + n) % n;
            grid[static_cast<std::size_t>(a) * n + b] += st.c[i];
        }
        fft2_backward(grid, n);
        auto values = std::make_shared<std::vector<double>>(grid.size());
        const double tol = 1e-13 * st.c_l1() + 1e-15;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            if (std::abs(grid[k].imag()) > tol)
                throw numerical_error("Fourier symbol has an imaginary part; stencil is not symmetric");
            (*values)[k] = grid[k].real();
        }
        if (cache_.size() > 16) cache_.clear();
        return cache_.emplace(key, std::move(values)).first->second;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<std::uint64_t, int>, std::shared_ptr<const std::vector<double>>> cache_;
};

inline symbol_grid_cache& symbol_cache() {
    static symbol_grid_cache c;
    return c;
}

inline lattice_greens greens_periodic(const stencil& st, cplx s, int max_offset, int n) {
    auto sym = symbol_cache().get(st, n);
    std::vector<cplx> grid(static_cast<std::size_t>(n) * n);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        cplx den = s + (*sym)[k];
        if (std::abs(den) < 1e-12)
            throw near_spectrum_error("s + symbol vanishes at a quadrature node", s);
        grid[k] = 1.0 / den;
    }
    fft2_backward(grid, n);
    lattice_greens g{s, max_offset, n, {}};
    const int side = g.side();
    g.table.resize(static_cast<std::size_t>(side) * side);
    const double norm = 1.0 / (static_cast<double>(n) * n);
    for (int a = -max_offset; a <= max_offset; ++a)
        for (int b = -max_offset; b <= max_offset; ++b)
            g.table[(a + max_offset) * side + (b + max_offset)] =
                grid[static_cast<std::size_t>((a + n) % n) * n + (b + n) % n] * norm;
    return g;
}

} // namespace detail

/// Lattice Green's function by the n x n periodic trapezoidal rule on [0, 2pi]^2,
/// which yields all offsets at once through one inverse FFT. n starts at
/// n_quad (raised to fit the table) and doubles until the table changes by
/// less than 1e-10 relative to |G_0|.
inline lattice_greens greens_function(const stencil& st, cplx s, int max_offset, int n_quad = 0,
                                      int n_max = 4096) {
    if (st.dim != 2) throw config_error("lattice Green's function expects a 2D stencil");
    int n = 16;
    while (n < 2 * (2 * max_offset + 1)) n *= 2;
    while (n < n_quad) n *= 2;
    lattice_greens prev = detail::greens_periodic(st, s, max_offset, n);
    for (;;) {
        if (2 * n > n_max)
            throw quadrature_failure(detail::concat("lattice Green's function unresolved at n = ", n,
                                                    " for s = ", s),
                                     0.0);
        lattice_greens next = detail::greens_periodic(st, s, max_offset, 2 * n);
        double diff = 0.0;
        for (std::size_t k = 0; k < next.table.size(); ++k)
            diff = std::max(diff, std::abs(next.table[k] - prev.table[k]));
        const double g0 = std::abs(next(multi_index{0, 0}));
        prev = std::move(next);
        n *= 2;
        if (diff <= 1e-10 * g0) break;
    }
    return prev;
}

/// |s G_k + sum_m c_m G_{k+m} - delta_{k,0}| maximised over |k|_inf <= max_offset - L.
inline double greens_residual(const stencil& st, const lattice_greens& g) {
    double worst = 0.0;
    const int R = g.max_offset - st.L;
    for (int a = -R; a <= R; ++a) {
        for (int b = -R; b <= R; ++b) {
            multi_index k{a, b};
            cplx acc = g.s * g(k);
            for (int i = 0; i < st.size(); ++i)
                if (st.c[i] != 0.0) acc += st.c[i] * g(k + st.offset(i));
            if (a == 0 && b == 0) acc -= 1.0;
            worst = std::max(worst, std::abs(acc));
        }
    }
    return worst;
}

struct dtd_map_2d {
    cmatrix map;               // ghost layer x inner layer (canonical enumerations)
    double condition = 0.0;    // 1 / rcond of the Gram block
};

/// K = G_{ghost, inner} G_{inner, inner}^{-1}, with Gram entries G_{k + l}.
inline dtd_map_2d dtd_map_2d_from(const lattice_greens& g, const std::vector<multi_index>& inner,
                                  const std::vector<multi_index>& ghost) {
    const int ni = static_cast<int>(inner.size()), ng = static_cast<int>(ghost.size());
    cmatrix gram(ni, ni), cross(ng, ni);
    for (int i = 0; i < ni; ++i)
        for (int j = 0; j < ni; ++j) gram(i, j) = g(inner[i] + inner[j]);
    for (int i = 0; i < ng; ++i)
        for (int j = 0; j < ni; ++j) cross(i, j) = g(ghost[i] + inner[j]);
    Eigen::PartialPivLU<cmatrix> lu(gram);
    const double rc = lu.rcond();
    dtd_map_2d out;
    out.condition = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
    if (!(out.condition <= 1e12))
        throw ill_posed_layer_error(detail::concat("Gram block of the inner layer is singular (cond ",
                                                   out.condition, ") at s = ", g.s),
                                    out.condition);
    // gram is symmetric, so K^T = gram^{-1} cross^T
    out.map = lu.solve(cross.transpose()).transpose();
    return out;
}

inline dtd_map_2d dtd_map_2d_for(const lattice_greens& g, const grid_spec& grid) {
    return dtd_map_2d_from(g, enumerate(region::inner_layer, grid.M, grid.L, 2),
                           enumerate(region::ghost_layer, grid.M, grid.L, 2));
}

} // namespace nlwave
