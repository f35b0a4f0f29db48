#pragma once

// Uniform lattices {k h : k in Z^d}, the square index regions used by the
// boundary construction, and dense fields stored on cubes |k|_inf < R.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <span>
#include <vector>

#include "nlwave/errors.hpp"

namespace nlwave {

using multi_index = std::array<int, 2>;   // second component is 0 in 1D

inline int inf_norm(const multi_index& k, int dim) {
    return dim == 1 ? std::abs(k[0]) : std::max(std::abs(k[0]), std::abs(k[1]));
}

inline multi_index operator+(const multi_index& a, const multi_index& b) {
    return {a[0] + b[0], a[1] + b[1]};
}
inline multi_index operator-(const multi_index& a, const multi_index& b) {
    return {a[0] - b[0], a[1] - b[1]};
}
inline multi_index operator-(const multi_index& a) { return {-a[0], -a[1]}; }

/// Integer ratio x/y, rejecting anything not within 1e-9 of an integer.
inline int exact_ratio(double x, double y, const char* what) {
    double q = x / y;
    double r = std::round(q);
    if (std::abs(q - r) > 1e-9 * std::max(1.0, std::abs(q)))
        throw config_error(detail::concat(what, " = ", q, " is not an integer"));
    return static_cast<int>(r);
}

struct grid_spec {
    int dim = 1;
    double h = 0.0;
    double delta = 0.0;
    double beta = 0.0;
    int L = 0;   // delta / h
    int M = 0;   // beta / h

    static grid_spec make(int dim, double h, double delta, double beta) {
        if (dim != 1 && dim != 2) throw config_error("grid dimension must be 1 or 2");
        if (!(h > 0.0)) throw config_error("mesh size h must be positive");
        if (!(delta > 0.0)) throw config_error("horizon delta must be positive");
        grid_spec g{dim, h, delta, beta};
        g.L = exact_ratio(delta, h, "delta/h");
        double m = beta / h;
        g.M = std::abs(m - std::round(m)) < 1e-9 * std::max(1.0, m) ? static_cast<int>(std::round(m))
                                                                     : static_cast<int>(std::ceil(m));
        if (g.M <= g.L)
            throw config_error(detail::concat("need M > L (M = ", g.M, ", L = ", g.L, ")"));
        return g;
    }
};

/// Index regions of the boundary construction, all defined through |k|_inf.
enum class region {
    interior,      // K      : |k| < M
    inner_core,    // K^-    : |k| < M - L
    inner_layer,   // K^-_g  : M - L <= |k| < M
    extended,      // K^+    : |k| < M + L
    ghost_layer,   // K^+_g  : M <= |k| < M + L
    exterior       // K^c    : |k| >= M
};

inline bool in_region(region r, const multi_index& k, int M, int L, int dim) {
    const int n = inf_norm(k, dim);
    switch (r) {
    case region::interior: return n < M;
    case region::inner_core: return n < M - L;
    case region::inner_layer: return n >= M - L && n < M;
    case region::extended: return n < M + L;
    case region::ghost_layer: return n >= M && n < M + L;
    case region::exterior: return n >= M;
    }
    return false;
}

/// Canonical (lexicographic, first coordinate slowest) enumeration of a bounded region.
inline std::vector<multi_index> enumerate(region r, int M, int L, int dim) {
    if (r == region::exterior) throw config_error("the exterior index set is unbounded");
    const int R = M + L;
    std::vector<multi_index> out;
    if (dim == 1) {
        for (int i = -R + 1; i < R; ++i)
            if (in_region(r, {i, 0}, M, L, dim)) out.push_back({i, 0});
        return out;
    }
    for (int i = -R + 1; i < R; ++i)
        for (int j = -R + 1; j < R; ++j)
            if (in_region(r, {i, j}, M, L, dim)) out.push_back({i, j});
    return out;
}

/// Cube {|k|_inf < R} with row-major linear indexing.
struct box_lattice {
    int dim = 1;
    int R = 1;

    int side() const { return 2 * R - 1; }
    int size() const { return dim == 1 ? side() : side() * side(); }
    bool contains(const multi_index& k) const { return inf_norm(k, dim) < R; }
    int index(const multi_index& k) const {
        return dim == 1 ? k[0] + R - 1 : (k[0] + R - 1) * side() + (k[1] + R - 1);
    }
    multi_index at(int i) const {
        if (dim == 1) return {i - R + 1, 0};
        return {i / side() - R + 1, i % side() - R + 1};
    }
    /// linear displacement of a lattice offset m (valid for in-box targets)
    int stride_of(const multi_index& m) const { return dim == 1 ? m[0] : m[0] * side() + m[1]; }
};

/// Scalar field on a box lattice.
struct lattice_field {
    box_lattice lattice;
    std::vector<double> values;

    lattice_field() = default;
    explicit lattice_field(box_lattice lat) : lattice(lat), values(lat.size(), 0.0) {}

    double& operator[](const multi_index& k) { return values[lattice.index(k)]; }
    double operator[](const multi_index& k) const { return values[lattice.index(k)]; }

    double value_or_throw(const multi_index& k) const {
        if (!lattice.contains(k))
            throw out_of_range_error(detail::concat("lattice field has no value at (", k[0], ",",
                                                    k[1], ")"));
        return (*this)[k];
    }
};

/// Sample f(x) at x = k h over the lattice.
template <class F>
lattice_field sample(const box_lattice& lat, double h, const F& f) {
    lattice_field u(lat);
    for (int i = 0; i < lat.size(); ++i) {
        multi_index k = lat.at(i);
        double x[2] = {k[0] * h, k[1] * h};
        u.values[i] = f(std::span<const double>(x, lat.dim));
    }
    return u;
}

} // namespace nlwave
