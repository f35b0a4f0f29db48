#pragma once

// Time-domain boundary machinery: the boundary-kernel table K^(j) obtained by
// inverse z-transform of the DtD map, its history convolution, and the DtD /
// DtN boundary providers for the leapfrog stepper.

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <span>
#include <vector>

#include "nlwave/cache.hpp"
#include "nlwave/dtd_1d.hpp"
#include "nlwave/dtd_2d.hpp"
#include "nlwave/errors.hpp"
#include "nlwave/lattice.hpp"
#include "nlwave/stencil.hpp"
#include "nlwave/timestepper.hpp"
#include "nlwave/ztransform.hpp"

namespace nlwave {

struct boundary_kernel_table {
    int dim = 1;
    int M = 0;
    int L = 0;
    int N = 0;
    double tau = 0.0;
    contour_spec contour;
    std::uint64_t stencil_hash = 0;
    int n_ghost = 0;
    int n_inner = 0;
    std::vector<double> data;   // j-major blocks, each n_ghost x n_inner row-major

    std::size_t block_size() const { return static_cast<std::size_t>(n_ghost) * n_inner; }
    std::span<const double> block(int j) const {
        if (j < 0 || j > N) throw table_exhausted_error(detail::concat("no kernel block for step ", j));
        return {data.data() + j * block_size(), block_size()};
    }
    double at(int j, int g, int i) const { return block(j)[static_cast<std::size_t>(g) * n_inner + i]; }
    std::size_t bytes() const { return data.size() * sizeof(double); }
    double max_abs() const {
        double m = 0.0;
        for (double v : data) m = std::max(m, std::abs(v));
        return m;
    }
};

struct table_build_options {
    double dtd_eps = 1e-14;
    int dtd_max_iter = 20;
    int greens_n_quad = 0;
    /// progress(done, total) after each contour node
    std::function<void(int, int)> progress;
};

/// Statistics gathered while sampling the z-domain map.
struct table_build_stats {
    int max_iterations = 0;       // 1D doubling iterations
    double max_condition = 0.0;   // 2D Gram conditioning
    int max_n_quad = 0;           // 2D Green's quadrature resolution
};

/// z-domain map at one contour node, ghost x inner, canonical enumerations.
inline cmatrix sample_dtd_map(const grid_spec& grid, const stencil& st, cplx s,
                              const table_build_options& opt, table_build_stats* stats = nullptr) {
    if (grid.dim == 1) {
        dtd_map_1d m = kcaret_iterative(assemble_toeplitz(st), s, opt.dtd_eps, opt.dtd_max_iter);
        const int L = grid.L;
        cmatrix full = cmatrix::Zero(2 * L, 2 * L);
        full.topLeftCorner(L, L) = m.left;
        full.bottomRightCorner(L, L) = m.right;
        if (stats) stats->max_iterations = std::max(stats->max_iterations, m.iterations);
        return full;
    }
    lattice_greens g = greens_function(st, s, 2 * (grid.M + grid.L), opt.greens_n_quad);
    dtd_map_2d m = dtd_map_2d_for(g, grid);
    if (stats) {
        stats->max_condition = std::max(stats->max_condition, m.condition);
        stats->max_n_quad = std::max(stats->max_n_quad, g.n_quad);
    }
    return m.map;
}

/// Sample the map on the half contour p = 0..P/2 and inverse-transform all
/// j = 0..N at once.
inline boundary_kernel_table build_boundary_table(const grid_spec& grid, const stencil& st,
                                                  const contour_spec& contour, int N, double tau,
                                                  const table_build_options& opt = {},
                                                  table_build_stats* stats_out = nullptr) {
    contour.validate(N);
    if (contour.P % 2) throw config_error("contour node count must be even");
    if (st.dim != grid.dim || st.L != grid.L) throw shape_error("stencil does not match the grid");

    boundary_kernel_table t;
    t.dim = grid.dim;
    t.M = grid.M;
    t.L = grid.L;
    t.N = N;
    t.tau = tau;
    t.contour = contour;
    t.stencil_hash = st.hash();
    t.n_ghost = static_cast<int>(enumerate(region::ghost_layer, grid.M, grid.L, grid.dim).size());
    t.n_inner = static_cast<int>(enumerate(region::inner_layer, grid.M, grid.L, grid.dim).size());
    const std::size_t entries = t.block_size();
    const int nh = contour.P / 2 + 1;

    std::vector<cplx> half(entries * nh);
    std::exception_ptr failure;
    std::mutex mtx;
    std::atomic<int> done{0};
    table_build_stats stats;

#pragma omp parallel for schedule(dynamic)
    for (int p = 0; p < nh; ++p) {
        {
            std::lock_guard lock(mtx);
            if (failure) continue;
        }
        try {
            cplx s = s_of_z(contour.node(p), tau);
            table_build_stats local;
            cmatrix K = sample_dtd_map(grid, st, s, opt, &local);
            for (int g = 0; g < t.n_ghost; ++g)
                for (int i = 0; i < t.n_inner; ++i)
                    half[(static_cast<std::size_t>(g) * t.n_inner + i) * nh + p] = K(g, i);
            std::lock_guard lock(mtx);
            stats.max_iterations = std::max(stats.max_iterations, local.max_iterations);
            stats.max_condition = std::max(stats.max_condition, local.max_condition);
            stats.max_n_quad = std::max(stats.max_n_quad, local.max_n_quad);
            int d = ++done;
            if (opt.progress) opt.progress(d, nh);
        } catch (const near_spectrum_error&) {
            std::lock_guard lock(mtx);
            if (!failure) failure = std::current_exception();
        } catch (const error& e) {
            std::lock_guard lock(mtx);
            if (!failure)
                failure = std::make_exception_ptr(numerical_error(detail::concat(
                    "contour node ", p, " (s = ", s_of_z(contour.node(p), tau), "): ", e.what())));
        }
    }
    if (failure) std::rethrow_exception(failure);

    t.data = inverse_ztransform_hermitian(half, entries, N, contour);
    if (stats_out) *stats_out = stats;
    return t;
}

/// Ghost values at level n: sum_{j=0}^{n} K^(n-j) u^(j)|_{K-_gamma}.
inline void apply_dtd_bc(const boundary_kernel_table& t, const inner_history& history, int n,
                         std::span<double> ghost) {
    if (n > t.N)
        throw table_exhausted_error(detail::concat("step ", n, " exceeds the table length N = ", t.N));
    if (history.steps() < n + 1) throw shape_error("history does not reach the requested step");
    if (history.width != t.n_inner || static_cast<int>(ghost.size()) != t.n_ghost)
        throw shape_error("boundary table does not match the layer sizes");
    using rowmat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<Eigen::VectorXd> out(ghost.data(), t.n_ghost);
    out.setZero();
    for (int j = 0; j <= n; ++j) {
        auto blk = t.block(n - j);
        Eigen::Map<const rowmat> K(blk.data(), t.n_ghost, t.n_inner);
        Eigen::Map<const Eigen::VectorXd> u(history.at(j).data(), t.n_inner);
        out.noalias() += K * u;
    }
}

/// Neumann data V u on K-_gamma: ghost filling by the DtD table followed by the
/// Neumann operator. `u` covers the layout cube; its ghost entries are ignored.
inline std::vector<double> apply_dtn_bc(const operator_plan& plan, const scheme_layout& lay,
                                        const boundary_kernel_table& t, const inner_history& history,
                                        int n, std::span<const double> u) {
    std::vector<double> ghost(lay.ghost.size());
    apply_dtd_bc(t, history, n, ghost);
    std::vector<double> full(u.begin(), u.end());
    for (std::size_t q = 0; q < lay.ghost.size(); ++q) full[lay.ghost[q]] = ghost[q];
    return neumann_operator(plan, lay, full);
}

class dtd_boundary : public boundary_provider {
public:
    explicit dtd_boundary(const boundary_kernel_table& table) : table_(table) {}
    void ghost_values(int n, const inner_history& history, std::span<double> out) override {
        apply_dtd_bc(table_, history, n, out);
    }

protected:
    const boundary_kernel_table& table_;
};

class dtn_boundary : public dtd_boundary {
public:
    using dtd_boundary::dtd_boundary;
    bc_kind kind() const override { return bc_kind::neumann; }
};

// ---- table cache -----------------------------------------------------------

inline constexpr char table_magic[9] = "NLWKTAB1";

inline std::uint64_t table_key(std::uint64_t stencil_hash, const grid_spec& g, double tau, int N,
                               const contour_spec& c) {
    content_hash hsh;
    hsh.add(static_cast<std::int64_t>(stencil_hash)).add(g.dim).add(g.M).add(g.L).add(tau).add(N)
        .add(c.rho).add(c.P);
    return hsh.value();
}

inline std::filesystem::path table_cache_path(const std::filesystem::path& dir, std::uint64_t key) {
    return dir / ("kernels_" + hex(key) + ".bin");
}

inline void save_table(const boundary_kernel_table& t, const std::filesystem::path& path) {
    binary_writer w(path);
    w.put_bytes(table_magic, 8).put<std::uint32_t>(1);
    w.put<std::uint64_t>(t.stencil_hash);
    w.put<std::int32_t>(t.dim).put<std::int32_t>(t.M).put<std::int32_t>(t.L);
    w.put<std::int32_t>(t.n_ghost).put<std::int32_t>(t.n_inner);
    w.put<double>(t.tau).put<std::int32_t>(t.N);
    w.put<double>(t.contour.rho).put<std::int32_t>(t.contour.P);
    w.put_doubles(t.data);
    w.commit();
}

/// Load a table and check it against the expected provenance.
inline boundary_kernel_table load_table(const std::filesystem::path& path, std::uint64_t stencil_hash,
                                        const grid_spec& g, double tau, int N, const contour_spec& c) {
    binary_reader r(path);
    expect_magic(r, table_magic, 1);
    boundary_kernel_table t;
    t.stencil_hash = r.get<std::uint64_t>();
    t.dim = r.get<std::int32_t>();
    t.M = r.get<std::int32_t>();
    t.L = r.get<std::int32_t>();
    t.n_ghost = r.get<std::int32_t>();
    t.n_inner = r.get<std::int32_t>();
    t.tau = r.get<double>();
    t.N = r.get<std::int32_t>();
    t.contour.rho = r.get<double>();
    t.contour.P = r.get<std::int32_t>();
    if (t.stencil_hash != stencil_hash || t.dim != g.dim || t.M != g.M || t.L != g.L || t.tau != tau ||
        t.N != N || t.contour.rho != c.rho || t.contour.P != c.P)
        throw cache_error("boundary table " + path.string() + " does not match the requested run");
    const auto ng = enumerate(region::ghost_layer, g.M, g.L, g.dim).size();
    const auto ni = enumerate(region::inner_layer, g.M, g.L, g.dim).size();
    if (static_cast<std::size_t>(t.n_ghost) != ng || static_cast<std::size_t>(t.n_inner) != ni)
        throw cache_error("boundary table " + path.string() + " has inconsistent layer sizes");
    t.data = r.get_doubles(static_cast<std::size_t>(N + 1) * t.block_size());
    r.expect_end();
    for (double v : t.data)
        if (!std::isfinite(v)) throw cache_error("boundary table " + path.string() + " holds non-finite values");
    return t;
}

/// Build or fetch from `dir`. Returns the table and whether it was a cache hit.
inline std::pair<boundary_kernel_table, bool> cached_table(const std::filesystem::path& dir,
                                                           const grid_spec& g, const stencil& st,
                                                           const contour_spec& c, int N, double tau,
                                                           const table_build_options& opt = {}) {
    const std::uint64_t key = table_key(st.hash(), g, tau, N, c);
    auto path = table_cache_path(dir, key);
    if (std::filesystem::exists(path)) return {load_table(path, st.hash(), g, tau, N, c), true};
    boundary_kernel_table t = build_boundary_table(g, st, c, N, tau, opt);
    save_table(t, path);
    return {std::move(t), false};
}

} // namespace nlwave
