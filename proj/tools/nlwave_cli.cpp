// nlwave: stencils, boundary-kernel tables, runs, convergence sweeps and
// boundary-mode comparisons driven by one config file.

#include <CLI11.hpp>
#include <omp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "nlwave/nlwave.hpp"

namespace fs = std::filesystem;
using namespace nlwave;

namespace {

struct options {
    std::string config;
    std::string cache_dir = ".nlwave-cache";
    bool strict_cfl = true;
    int workers = 0;
    bool double_P = false;
};

/// key = value provenance lines, written as comments above the canonical
/// config so the manifest can be fed back through --config.
class manifest {
public:
    void add(const std::string& key, const std::string& value) { lines_.emplace_back(key, value); }
    void add(const std::string& key, double v) { add(key, fmt_double(v)); }
    void add(const std::string& key, int v) { add(key, std::to_string(v)); }

    void write(const fs::path& dir, const std::string& command, const run_config& c) const {
        std::ofstream os(dir / "manifest.ini");
        if (!os) throw config_error("cannot write " + (dir / "manifest.ini").string());
        os << "# nlwave " << command << '\n';
        for (const auto& [k, v] : lines_) os << "# " << k << " = " << v << '\n';
        os << '\n';
        write_run_config(os, c);
    }

private:
    std::vector<std::pair<std::string, std::string>> lines_;
};

fs::path output_dir(const run_config& c) {
    fs::path dir(c.out_dir);
    fs::create_directories(dir);
    return dir;
}

std::ofstream open_csv(const fs::path& path) {
    std::ofstream os(path);
    if (!os) throw config_error("cannot write " + path.string());
    return os;
}

std::uint64_t table_content_hash(const boundary_kernel_table& t) {
    content_hash h;
    h.add(static_cast<std::int64_t>(t.stencil_hash)).add(std::span<const double>(t.data));
    return h.value();
}

stencil load_stencil_for(const options& o, const run_config& c, const grid_spec& g, manifest& m) {
    auto [st, hit] = cached_stencil(o.cache_dir, c.kernel, g, c.p, c.quad_tol);
    m.add("stencil_cache", hit ? "hit" : "miss");
    m.add("stencil_key", hex(stencil_key(c.kernel, g.h, c.p, c.quad_tol)));
    m.add("stencil_hash", hex(st.hash()));
    m.add("L", g.L);
    m.add("M", g.M);
    m.add("S", st.S);
    m.add("tau_max", cfl_bound(st));
    return st;
}

boundary_kernel_table load_table_for(const options& o, const run_config& c, const grid_spec& g,
                                     const stencil& st, manifest& m) {
    const time_grid time = c.time();
    const contour_spec contour = c.contour();
    table_build_options tb;
    int last_pct = -1;
    tb.progress = [&](int done, int total) {
        int pct = 100 * done / total;
        if (pct / 10 != last_pct / 10 || done == total) {
            last_pct = pct;
            std::cerr << "contour nodes " << done << "/" << total << '\n';
        }
    };
    auto [table, hit] = cached_table(o.cache_dir, g, st, contour, time.N, time.tau, tb);
    m.add("table_cache", hit ? "hit" : "miss");
    m.add("table_key", hex(table_key(st.hash(), g, time.tau, time.N, contour)));
    m.add("table_hash", hex(table_content_hash(table)));
    m.add("table_blocks", table.N + 1);
    m.add("contour_P", contour.P);
    m.add("contour_rho", contour.rho);
    return table;
}

problem make_problem(const run_config& c, const grid_spec& g, bool strict) {
    problem pb;
    pb.grid = g;
    pb.time = c.time();
    pb.phi = preset_field(c.phi, c.kernel.dim, false);
    pb.psi = preset_field(c.psi, c.kernel.dim, true);
    pb.bc = c.bc;
    pb.snapshot_steps = c.snapshot_steps();
    pb.record_energy = c.energy;
    pb.strict_cfl = strict;
    pb.support_tol = c.support_tol;
    return pb;
}

void write_snapshot(const fs::path& path, const grid_spec& g, const std::vector<double>& values) {
    auto os = open_csv(path);
    if (g.dim == 1)
        write_snapshot_1d(os, g.h, g.M, values);
    else
        write_snapshot_2d(os, g.h, g.M, values);
}

// ---- subcommands ---------------------------------------------------------------

int cmd_stencil(const options& o, const run_config& c) {
    manifest m;
    const grid_spec g = c.grid();
    stencil st = load_stencil_for(o, c, g, m);
    for (int i = 0; i < st.size(); ++i)
        if (st.a[i] != st.a_at(-st.offset(i))) throw numerical_error("stencil is not symmetric");
    if (c.p == 1 && !st.nonnegative()) throw numerical_error("linear stencil has negative coefficients");
    double sum = 0.0;
    for (double v : st.c) sum += v;
    if (std::abs(sum) > 1e-12 * st.c_l1()) throw numerical_error("stencil does not annihilate constants");
    if (!st.nonnegative()) m.add("warning", "a has negative entries; the energy seminorm is indefinite");

    fs::path dir = output_dir(c);
    auto os = open_csv(dir / "stencil.csv");
    write_stencil_csv(st, os);
    m.write(dir, "stencil", c);
    std::cout << "stencil " << hex(st.hash()) << " (" << (st.size()) << " coefficients, S = " << st.S
              << ") -> " << (dir / "stencil.csv").string() << '\n';
    return 0;
}

int cmd_kernels(const options& o, const run_config& c) {
    manifest m;
    const grid_spec g = c.grid();
    stencil st = load_stencil_for(o, c, g, m);
    boundary_kernel_table t = load_table_for(o, c, g, st, m);
    fs::path dir = output_dir(c);
    std::cout << "boundary table: " << t.N + 1 << " blocks of " << t.n_ghost << " x " << t.n_inner << ", "
              << t.bytes() << " bytes\n";
    if (o.double_P) {
        const time_grid time = c.time();
        contour_spec fine = contour_spec::make(time.N, 2 * t.contour.P, c.theta);
        boundary_kernel_table t2 = build_boundary_table(g, st, fine, time.N, time.tau);
        auto os = open_csv(dir / "kernels_double_P.csv");
        os << "j,max_abs_diff,max_abs\n";
        double worst = 0.0;
        for (int j = 0; j <= t.N; ++j) {
            double d = 0.0, mag = 0.0;
            auto a = t.block(j), b = t2.block(j);
            for (std::size_t i = 0; i < a.size(); ++i) {
                d = std::max(d, std::abs(a[i] - b[i]));
                mag = std::max(mag, std::abs(a[i]));
            }
            worst = std::max(worst, d);
            os << j << ',' << fmt_double(d) << ',' << fmt_double(mag) << '\n';
        }
        m.add("double_P_max_diff", worst);
        std::cout << "doubling P to " << fine.P << " changes the table by at most " << worst << '\n';
    }
    m.write(dir, "kernels", c);
    return 0;
}

int cmd_run(const options& o, const run_config& c) {
    manifest m;
    const grid_spec g = c.grid();
    stencil st = load_stencil_for(o, c, g, m);
    std::optional<boundary_kernel_table> table;
    if (c.bc != bc_mode::zero_dirichlet) table = load_table_for(o, c, g, st, m);
    problem pb = make_problem(c, g, o.strict_cfl);
    trajectory tr = solve(pb, st, table ? &*table : nullptr);

    fs::path dir = output_dir(c);
    for (const auto& w : tr.warnings) {
        std::cerr << "warning: " << w << '\n';
        m.add("warning", w);
    }
    for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "snapshot_%06d.csv", tr.snapshot_steps[i]);
        write_snapshot(dir / name, g, tr.snapshots[i]);
        m.add("snapshot", std::string(name) + " t=" + fmt_double(tr.snapshot_steps[i] * c.tau));
    }
    if (c.energy) {
        auto os = open_csv(dir / "energy.csv");
        os << "n,t,kinetic,potential,total,conserved\n";
        for (std::size_t i = 0; i < tr.energy.size(); ++i) {
            const auto& e = tr.energy[i];
            os << i + 1 << ',' << fmt_double((i + 1) * c.tau) << ',' << fmt_double(e.kinetic) << ','
               << fmt_double(e.potential) << ',' << fmt_double(e.total) << ',' << fmt_double(e.conserved) << '\n';
        }
    }
    m.write(dir, "run", c);
    std::cout << "run: " << tr.snapshots.size() << " snapshots -> " << dir.string() << '\n';
    return 0;
}

int cmd_converge(const options& o, const run_config& c) {
    manifest m;
    std::vector<double> ladder = c.h_ladder.empty() ? std::vector<double>{c.h} : c.h_ladder;
    std::sort(ladder.begin(), ladder.end(), std::greater<>());
    reference_options ro;
    ro.half_width = c.reference_half_width;
    ro.modes = c.reference_modes;
    field_fn phi = preset_field(c.phi, c.kernel.dim, false);
    field_fn psi = preset_field(c.psi, c.kernel.dim, true);
    spectral_state ref = spectral_solution(c.kernel, phi, psi, nullptr, c.T, ro);

    std::vector<ladder_entry> entries;
    for (double h : ladder) {
        const grid_spec g = c.grid_at(h);
        manifest local;
        stencil st = load_stencil_for(o, c, g, local);
        m.add("stencil_hash[h=" + fmt_double(h) + "]", hex(st.hash()));
        problem pb = make_problem(c, g, o.strict_cfl);
        pb.snapshot_steps = {pb.time.N};
        pb.record_energy = false;
        trajectory tr;
        int P = 0;
        if (c.converge_solver == "free-space") {
            tr = solve_free_space(pb, st);
            m.add("padding[h=" + fmt_double(h) + "]", tr.padding);
        } else {
            run_config ch = c;
            ch.h = h;
            boundary_kernel_table t = load_table_for(o, ch, g, st, local);
            m.add("table_hash[h=" + fmt_double(h) + "]", hex(table_content_hash(t)));
            P = t.contour.P;
            pb.bc = bc_mode::dtn;
            tr = solve(pb, st, &t);
        }
        ladder_entry e{h, c.tau, P, g.dim, tr.snapshots.back(), {}};
        for (const multi_index& k : enumerate(region::interior, g.M, 0, g.dim)) {
            double x[2] = {k[0] * h, k[1] * h};
            e.reference.push_back(ref.evaluate(std::span<const double>(x, g.dim)));
        }
        entries.push_back(std::move(e));
        std::cerr << "h = " << h << " done\n";
    }
    error_table t = l2_error_and_rate(entries);
    fs::path dir = output_dir(c);
    auto os = open_csv(dir / "convergence.csv");
    write_error_table(os, t);
    m.add("slope", t.slope);
    m.write(dir, "converge", c);
    for (const auto& r : t.rows)
        std::cout << "h = " << r.h << "  error = " << r.l2_error << "  rate = " << fmt_double(r.pair_rate) << '\n';
    std::cout << "slope = " << fmt_double(t.slope) << '\n';
    return 0;
}

int cmd_compare_bc(const options& o, const run_config& c) {
    manifest m;
    const grid_spec g = c.grid();
    stencil st = load_stencil_for(o, c, g, m);
    boundary_kernel_table table = load_table_for(o, c, g, st, m);
    problem pb = make_problem(c, g, o.strict_cfl);
    pb.keep_levels = true;
    pb.record_energy = false;
    trajectory oracle = solve_free_space(pb, st);
    m.add("oracle_padding", oracle.padding);

    fs::path dir = output_dir(c);
    auto os = open_csv(dir / "compare_bc.csv");
    os << "mode,reflection_max,final_deviation\n";
    for (bc_mode mode : {bc_mode::dtn, bc_mode::dtd, bc_mode::zero_dirichlet}) {
        pb.bc = mode;
        trajectory tr = solve(pb, st, &table);
        auto r = reflection_coefficient(tr.levels, oracle.levels);
        os << to_string(mode) << ',' << fmt_double(r.max) << ',' << fmt_double(r.per_step.back()) << '\n';
        std::cout << to_string(mode) << ": max relative deviation from free space " << r.max << '\n';
        m.add("reflection[" + to_string(mode) + "]", r.max);
    }
    m.write(dir, "compare-bc", c);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonlocal wave equation on unbounded domains with exact artificial boundary conditions"};
    app.require_subcommand(1);
    app.fallthrough();
    options o;
    app.add_option("--cache-dir", o.cache_dir, "directory for stencil and boundary-kernel caches");
    app.add_option("--strict-cfl", o.strict_cfl, "abort when tau exceeds 2/sqrt(S) (false: warn and run)");
    app.add_option("--workers", o.workers, "OpenMP threads (0: runtime default)");
    app.add_flag("--double-P-check", o.double_P, "rebuild the table with 2P nodes and report the change");

    struct sub {
        const char* name;
        const char* help;
        int (*run)(const options&, const run_config&);
    };
    const sub subs[] = {
        {"stencil", "build or load the stencil and dump it as CSV", cmd_stencil},
        {"kernels", "build or load the boundary-kernel table", cmd_kernels},
        {"run", "time-dependent run with snapshot output", cmd_run},
        {"converge", "L2 errors and rates against the pseudo-spectral reference", cmd_converge},
        {"compare-bc", "dtn, dtd and zero-Dirichlet runs against the free-space oracle", cmd_compare_bc},
    };
    std::vector<CLI::App*> apps;
    for (const sub& s : subs) {
        CLI::App* a = app.add_subcommand(s.name, s.help);
        a->add_option("--config", o.config, "run configuration file")->required();
        apps.push_back(a);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (o.workers > 0) omp_set_num_threads(o.workers);

    try {
        run_config c = load_run_config(o.config);
        for (std::size_t i = 0; i < apps.size(); ++i)
            if (apps[i]->parsed()) return subs[i].run(o, c);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const cache_error& e) {
        std::cerr << "cache error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    }
    return 2;
}
