#pragma once

// Norms, energies, error tables, convergence rates and reflection measurements.

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "nlwave/errors.hpp"
#include "nlwave/lattice.hpp"
#include "nlwave/stencil.hpp"

namespace nlwave {

/// h^d sum_{|k|_inf < R} u_k v_k over a box field (R = 0: whole lattice).
inline double inner_product_h(const lattice_field& u, const lattice_field& v, double h, int R = 0) {
    if (u.lattice.dim != v.lattice.dim || u.lattice.R != v.lattice.R)
        throw shape_error("fields live on different lattices");
    if (R == 0) R = u.lattice.R;
    double acc = 0.0;
    for (int i = 0; i < u.lattice.size(); ++i)
        if (inf_norm(u.lattice.at(i), u.lattice.dim) < R) acc += u.values[i] * v.values[i];
    return acc * std::pow(h, u.lattice.dim);
}

inline double norm_h(const lattice_field& u, double h, int R = 0) {
    return std::sqrt(inner_product_h(u, u, h, R));
}

/// <u, v> = (h^d / 2) sum_k sum_m a_{k-m} (u_k - u_m)(v_k - v_m) over pairs with
/// |k|_inf, |m|_inf < R (R = 0: whole lattice).
inline double seminorm(const stencil& st, const lattice_field& u, const lattice_field& v, int R = 0) {
    if (u.lattice.dim != v.lattice.dim || u.lattice.R != v.lattice.R || u.lattice.dim != st.dim)
        throw shape_error("seminorm operands live on different lattices");
    const box_lattice& lat = u.lattice;
    if (R == 0) R = lat.R;
    double acc = 0.0;
    for (int i = 0; i < lat.size(); ++i) {
        multi_index k = lat.at(i);
        if (inf_norm(k, lat.dim) >= R) continue;
        double row = 0.0;
        for (int j = 0; j < st.size(); ++j) {
            if (st.a[j] == 0.0) continue;
            multi_index m = k + st.offset(j);
            if (inf_norm(m, lat.dim) >= R) continue;
            int im = lat.index(m);
            row += st.a[j] * (u.values[i] - u.values[im]) * (v.values[i] - v.values[im]);
        }
        acc += row;
    }
    return 0.5 * std::pow(st.h, st.dim) * acc;
}

struct energy_report {
    double kinetic = 0.0;     // ||(u^n - u^(n-1)) / tau||_h^2
    double potential = 0.0;   // (1/4) <u^n + u^(n-1), u^n + u^(n-1)>
    double total = 0.0;       // kinetic + potential
    /// total - (tau^2 / 4) <D u, D u>: the quantity leapfrog conserves exactly
    double conserved = 0.0;
    bool indefinite = false;  // a has negative entries; potential may be negative
};

/// Energy of the pair (u^n, u^(n-1)) restricted to |k|_inf < R.
inline energy_report energy(const stencil& st, const lattice_field& un, const lattice_field& unm1,
                            double tau, int R = 0) {
    lattice_field diff(un.lattice), sum(un.lattice);
    for (std::size_t i = 0; i < un.values.size(); ++i) {
        diff.values[i] = (un.values[i] - unm1.values[i]) / tau;
        sum.values[i] = un.values[i] + unm1.values[i];
    }
    energy_report e;
    e.kinetic = inner_product_h(diff, diff, st.h, R);
    e.potential = 0.25 * seminorm(st, sum, sum, R);
    e.total = e.kinetic + e.potential;
    e.conserved = e.total - 0.25 * tau * tau * seminorm(st, diff, diff, R);
    e.indefinite = !st.nonnegative();
    return e;
}

struct ladder_entry {
    double h = 0.0;
    double tau = 0.0;
    int P = 0;
    int dim = 1;
    std::vector<double> numerical;
    std::vector<double> reference;
};

struct error_row {
    double h = 0.0;
    double tau = 0.0;
    int P = 0;
    double l2_error = 0.0;
    double pair_rate = std::numeric_limits<double>::quiet_NaN();
};

struct error_table {
    std::vector<error_row> rows;
    double slope = std::numeric_limits<double>::quiet_NaN();
};

/// error(h) = ||u_h - u_ref||_h, pairwise rates log(e1/e2)/log(h1/h2), and the
/// least-squares slope over the ladder. Both fields of an entry must be given
/// on the same lattice.
inline error_table l2_error_and_rate(const std::vector<ladder_entry>& ladder) {
    error_table t;
    for (const ladder_entry& e : ladder) {
        if (e.numerical.size() != e.reference.size())
            throw config_error(detail::concat("ladder entry h = ", e.h,
                                              ": numerical and reference lattices differ"));
        double acc = 0.0;
        for (std::size_t i = 0; i < e.numerical.size(); ++i) {
            double d = e.numerical[i] - e.reference[i];
            acc += d * d;
        }
        error_row r{e.h, e.tau, e.P, std::sqrt(acc * std::pow(e.h, e.dim))};
        if (!t.rows.empty()) {
            const error_row& prev = t.rows.back();
            r.pair_rate = std::log(prev.l2_error / r.l2_error) / std::log(prev.h / r.h);
        }
        t.rows.push_back(r);
    }
    if (t.rows.size() >= 2) {
        std::vector<double> hs, es;
        for (const auto& r : t.rows) {
            hs.push_back(r.h);
            es.push_back(r.l2_error);
        }
        t.slope = loglog_slope(hs, es);
    }
    return t;
}

struct reflection_report {
    std::vector<double> per_step;
    double max = 0.0;
};

/// ||u_abc^(n) - u_oracle^(n)||_h / max_n ||u_oracle^(n)||_h on K.
inline reflection_report reflection_coefficient(const std::vector<std::vector<double>>& abc,
                                                const std::vector<std::vector<double>>& oracle) {
    if (abc.size() != oracle.size()) throw shape_error("trajectories have different lengths");
    double peak = 0.0;
    std::vector<double> diffs;
    for (std::size_t n = 0; n < abc.size(); ++n) {
        if (abc[n].size() != oracle[n].size()) throw shape_error("trajectory levels have different sizes");
        double d = 0.0, o = 0.0;
        for (std::size_t i = 0; i < abc[n].size(); ++i) {
            d += (abc[n][i] - oracle[n][i]) * (abc[n][i] - oracle[n][i]);
            o += oracle[n][i] * oracle[n][i];
        }
        diffs.push_back(std::sqrt(d));
        peak = std::max(peak, std::sqrt(o));
    }
    reflection_report r;
    for (double d : diffs) {
        r.per_step.push_back(peak > 0.0 ? d / peak : d);
        r.max = std::max(r.max, r.per_step.back());
    }
    return r;
}

// ---- CSV ---------------------------------------------------------------------

inline std::string fmt_double(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// 1D snapshot over K: columns x,u.
inline void write_snapshot_1d(std::ostream& os, double h, int M, std::span<const double> values) {
    if (values.size() != static_cast<std::size_t>(2 * M - 1)) throw shape_error("snapshot size differs from K");
    os << "x,u\n";
    for (int i = 0; i < 2 * M - 1; ++i) os << fmt_double((i - M + 1) * h) << ',' << fmt_double(values[i]) << '\n';
}

/// 2D snapshot over K: header line, then one row per first index.
inline void write_snapshot_2d(std::ostream& os, double h, int M, std::span<const double> values) {
    const int side = 2 * M - 1;
    if (values.size() != static_cast<std::size_t>(side) * side) throw shape_error("snapshot size differs from K");
    os << "# h=" << fmt_double(h) << ",M=" << M << '\n';
    for (int i = 0; i < side; ++i) {
        for (int j = 0; j < side; ++j) {
            if (j) os << ',';
            os << fmt_double(values[static_cast<std::size_t>(i) * side + j]);
        }
        os << '\n';
    }
}

inline void write_error_table(std::ostream& os, const error_table& t) {
    os << "h,tau,P,l2_error,pair_rate,slope\n";
    for (const auto& r : t.rows)
        os << fmt_double(r.h) << ',' << fmt_double(r.tau) << ',' << r.P << ',' << fmt_double(r.l2_error)
           << ',' << fmt_double(r.pair_rate) << ',' << fmt_double(t.slope) << '\n';
}

} // namespace nlwave
