#pragma once

// Full runs: the truncated scheme with a boundary provider, the padded
// free-space oracle, and the perturbed scheme behind the stability estimate.

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nlwave/diagnostics.hpp"
#include "nlwave/dtn.hpp"
#include "nlwave/errors.hpp"
#include "nlwave/lattice.hpp"
#include "nlwave/reference.hpp"
#include "nlwave/stencil.hpp"
#include "nlwave/timestepper.hpp"

namespace nlwave {

enum class bc_mode { dtn, dtd, zero_dirichlet };

inline std::string to_string(bc_mode m) {
    switch (m) {
    case bc_mode::dtn: return "dtn";
    case bc_mode::dtd: return "dtd";
    case bc_mode::zero_dirichlet: return "zero-dirichlet";
    }
    return "?";
}

inline bc_mode parse_bc_mode(std::string_view s) {
    if (s == "dtn") return bc_mode::dtn;
    if (s == "dtd") return bc_mode::dtd;
    if (s == "zero-dirichlet") return bc_mode::zero_dirichlet;
    throw config_error("unknown boundary mode '" + std::string(s) + "'");
}

struct problem {
    grid_spec grid;
    time_grid time;
    field_fn phi;
    field_fn psi;
    source_fn f;                      // empty: no source
    bc_mode bc = bc_mode::dtn;
    std::vector<int> snapshot_steps;
    bool keep_levels = false;         // store u on K at every level
    bool record_energy = false;
    bool strict_cfl = true;
    double support_tol = 1e-14;
};

struct trajectory {
    std::vector<int> snapshot_steps;
    std::vector<std::vector<double>> snapshots;   // values on K, lexicographic
    std::vector<std::vector<double>> levels;      // every level when keep_levels
    std::vector<energy_report> energy;            // entry n-1 for level pairs (n, n-1)
    std::vector<std::string> warnings;
    wave_state final_state;
    int padding = 0;                              // free-space runs only
};

/// Sample f on the lattice; values outside |k|_inf < core must be negligible
/// (below tol times the peak) and are set to zero.
inline lattice_field sample_supported(const box_lattice& lat, double h, const field_fn& f, int core,
                                      double tol, const char* what) {
    lattice_field u(lat);
    if (!f) return u;
    u = sample(lat, h, f);
    double peak = 0.0;
    for (double v : u.values) peak = std::max(peak, std::abs(v));
    for (int i = 0; i < lat.size(); ++i) {
        multi_index k = lat.at(i);
        if (inf_norm(k, lat.dim) < core) continue;
        if (std::abs(u.values[i]) > tol * peak)
            throw config_error(detail::concat(what, " is not compactly supported inside K- (value ",
                                              u.values[i], " at node (", k[0], ",", k[1], "))"));
        u.values[i] = 0.0;
    }
    return u;
}

inline std::vector<double> restrict_to(const lattice_field& u, int M) {
    std::vector<double> out;
    const int dim = u.lattice.dim;
    for (const multi_index& k : enumerate(region::interior, M, 0, dim)) out.push_back(u[k]);
    return out;
}

namespace detail {

struct run_hooks {
    /// called after every new level n (including n = 0, 1)
    std::function<void(const wave_state&)> after_level;
};

inline trajectory run_scheme(const problem& pb, const stencil& st, int M_run, boundary_provider& bc,
                             const run_hooks& hooks = {}) {
    const grid_spec& g = pb.grid;
    const double tau = pb.time.tau;
    trajectory tr;
    if (tau > cfl_bound(st)) {
        std::string msg = detail::concat("tau = ", tau, " exceeds the CFL bound 2/sqrt(S) = ", cfl_bound(st));
        if (pb.strict_cfl) throw config_error(msg);
        tr.warnings.push_back(msg);
    }
    scheme_layout lay = scheme_layout::make(g.dim, M_run, g.L);
    const int core = g.M - g.L;
    auto phi = sample_supported(lay.lattice, g.h, pb.phi, core, pb.support_tol, "initial displacement");
    auto psi = sample_supported(lay.lattice, g.h, pb.psi, core, pb.support_tol, "initial velocity");
    auto source_at = [&](int n) {
        return sample_supported(lay.lattice, g.h,
                                [&](std::span<const double> x) { return pb.f(x, n * tau); }, core,
                                pb.support_tol, "source");
    };
    std::optional<lattice_field> f0;
    if (pb.f) f0 = source_at(0);

    wave_state s = initial_steps(phi, psi, f0 ? &*f0 : nullptr, st, lay, tau, pb.support_tol);
    s.record_history = bc.needs_history();
    if (!s.record_history) s.history.data.clear();

    std::size_t next_snap = 0;
    std::vector<int> snaps = pb.snapshot_steps;
    std::sort(snaps.begin(), snaps.end());
    auto record = [&](const lattice_field& level, int n) {
        while (next_snap < snaps.size() && snaps[next_snap] == n) {
            tr.snapshot_steps.push_back(n);
            tr.snapshots.push_back(restrict_to(level, g.M));
            ++next_snap;
        }
        if (pb.keep_levels) tr.levels.push_back(restrict_to(level, g.M));
    };
    wave_state first{0, s.prev, s.prev, {}, false};
    record(s.prev, 0);
    if (hooks.after_level) hooks.after_level(first);
    if (pb.time.N >= 1) {
        record(s.curr, 1);
        if (pb.record_energy) tr.energy.push_back(energy(st, s.curr, s.prev, tau, g.M));
        if (hooks.after_level) hooks.after_level(s);
    }

    leapfrog lf(st, lay, tau);
    while (s.n < pb.time.N) {
        std::optional<lattice_field> fn;
        if (pb.f) fn = source_at(s.n);
        lf.step(s, bc, fn ? &*fn : nullptr);
        record(s.curr, s.n);
        if (pb.record_energy) tr.energy.push_back(energy(st, s.curr, s.prev, tau, g.M));
        if (hooks.after_level) hooks.after_level(s);
    }
    tr.final_state = std::move(s);
    return tr;
}

} // namespace detail

/// Bounded-domain run with the configured boundary mode. dtn/dtd need a table
/// covering N steps.
inline trajectory solve(const problem& pb, const stencil& st, const boundary_kernel_table* table) {
    if (st.dim != pb.grid.dim || st.L != pb.grid.L) throw shape_error("stencil does not match the grid");
    if (pb.bc == bc_mode::zero_dirichlet) {
        zero_boundary bc;
        return detail::run_scheme(pb, st, pb.grid.M, bc);
    }
    if (!table) throw config_error("dtn/dtd runs need a boundary-kernel table");
    if (table->N < pb.time.N)
        throw table_exhausted_error(detail::concat("table covers ", table->N, " steps, run needs ", pb.time.N));
    if (table->M != pb.grid.M || table->L != pb.grid.L || table->dim != pb.grid.dim)
        throw shape_error("boundary table was built for another grid");
    if (pb.bc == bc_mode::dtd) {
        dtd_boundary bc(*table);
        return detail::run_scheme(pb, st, pb.grid.M, bc);
    }
    dtn_boundary bc(*table);
    return detail::run_scheme(pb, st, pb.grid.M, bc);
}

/// Zero-Dirichlet run on the lattice enlarged by `padding` cells per side,
/// restricted to K. The explicit stencil moves information at most L cells
/// per step, so padding >= N L is always exact; smaller paddings are accepted
/// when the field never exceeds `signal_tol` (relative to its peak on K) in
/// the last L cells before the far boundary. padding < 0 chooses it
/// automatically, doubling until valid.
inline trajectory solve_free_space(const problem& pb, const stencil& st, int padding = -1,
                                   double signal_tol = 1e-14) {
    const grid_spec& g = pb.grid;
    const int exact_pad = pb.time.N * g.L + g.L;
    const bool automatic = padding < 0;
    if (automatic) {
        int guess = 4 * g.L + static_cast<int>(std::ceil(2.0 * pb.time.T() / g.h));
        padding = std::min(guess, exact_pad);
    }
    for (;;) {
        const int Mp = g.M + padding;
        double peak = 0.0, edge = 0.0;
        detail::run_hooks hooks;
        hooks.after_level = [&](const wave_state& s) {
            const auto& lat = s.curr.lattice;
            for (int i = 0; i < lat.size(); ++i) {
                int r = inf_norm(lat.at(i), lat.dim);
                double v = std::abs(s.curr.values[i]);
                if (r < g.M) peak = std::max(peak, v);
                else if (r >= Mp - g.L && r < Mp) edge = std::max(edge, v);
            }
        };
        zero_boundary bc;
        trajectory tr = detail::run_scheme(pb, st, Mp, bc, hooks);
        tr.padding = padding;
        if (padding >= exact_pad || edge <= signal_tol * peak) return tr;
        if (!automatic)
            throw oracle_invalid_error(detail::concat("free-space padding ", padding, " cells too small: field ",
                                                      edge, " near the far boundary (peak ", peak, ")"));
        padding = std::min(2 * padding, exact_pad);
    }
}

// ---- stability estimate ------------------------------------------------------

/// Perturbation streams: g^(n) on the scheme lattice, g_b^(n) on K-_gamma.
struct perturbation_streams {
    std::function<void(int, lattice_field&)> interior;
    std::function<void(int, std::span<double>)> boundary;
};

struct stability_report {
    std::vector<double> energy;   // ||phi^(l)||_E^2, l = 1..N
    double max_energy = 0.0;
    double initial = 0.0;         // ||D_tau mu^(0)||_h^2
    double forcing = 0.0;         // tau sum_n (||g^(n)||_h^2 + h^{-d} ||g_b^(n)||^2)
    double ratio = 0.0;           // (max_energy - initial) / forcing, the effective constant
};

namespace detail {

class perturbed_dtn final : public dtn_boundary {
public:
    perturbed_dtn(const boundary_kernel_table& t, std::function<void(int, std::span<double>)> gb,
                  double* sink)
        : dtn_boundary(t), gb_(std::move(gb)), sink_(sink) {}
    void neumann_perturbation(int n, std::span<double> data) override {
        if (!gb_) return;
        std::vector<double> extra(data.size(), 0.0);
        gb_(n, extra);
        double sq = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            data[i] += extra[i];
            sq += extra[i] * extra[i];
        }
        *sink_ = sq;
    }

private:
    std::function<void(int, std::span<double>)> gb_;
    double* sink_;
};

} // namespace detail

/// Perturbed DtN scheme from zero data (mu = 0): g enters the interior
/// equation, g_b the Neumann relation. Reports the energy trace and the
/// effective constant of the stability estimate.
inline stability_report stability_probe(const grid_spec& g, const stencil& st,
                                        const boundary_kernel_table& table, const time_grid& time,
                                        const perturbation_streams& streams) {
    if (time.tau > cfl_bound(st)) throw config_error("stability probe requires tau <= 2/sqrt(S)");
    if (table.N < time.N) throw table_exhausted_error("boundary table shorter than the probe");
    scheme_layout lay = scheme_layout::make(g.dim, g.M, g.L);
    const double hd = std::pow(g.h, g.dim);
    lattice_field zero(lay.lattice);
    wave_state s = initial_steps(zero, zero, nullptr, st, lay, time.tau);
    double gb_sq = 0.0;
    detail::perturbed_dtn bc(table, streams.boundary, &gb_sq);
    leapfrog lf(st, lay, time.tau);

    stability_report rep;
    rep.initial = energy(st, s.curr, s.prev, time.tau, g.M).kinetic;
    rep.energy.push_back(energy(st, s.curr, s.prev, time.tau, g.M).total);
    lattice_field gn(lay.lattice);
    while (s.n < time.N) {
        std::fill(gn.values.begin(), gn.values.end(), 0.0);
        if (streams.interior) streams.interior(s.n, gn);
        for (int k : lay.ghost) gn.values[k] = 0.0;
        gb_sq = 0.0;
        lf.step(s, bc, &gn);
        rep.forcing += time.tau * (inner_product_h(gn, gn, g.h, g.M) + gb_sq / hd);
        rep.energy.push_back(energy(st, s.curr, s.prev, time.tau, g.M).total);
    }
    for (double e : rep.energy) rep.max_energy = std::max(rep.max_energy, e);
    rep.ratio = rep.forcing > 0.0 ? (rep.max_energy - rep.initial) / rep.forcing : 0.0;
    return rep;
}

} // namespace nlwave
