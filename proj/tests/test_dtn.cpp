#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "nlwave/dtn.hpp"
#include "nlwave/solver.hpp"

using namespace nlwave;

namespace {

struct setup_1d {
    grid_spec grid = grid_spec::make(1, 1.0 / 16, 0.25, 1.0);
    stencil st = build_stencil(constant_kernel(0.25, 1), grid, 1, 1e-13);
    scheme_layout lay = scheme_layout::make(1, grid.M, grid.L);
};

const setup_1d& one_d() {
    static setup_1d s;
    return s;
}

std::vector<double> random_field(int n, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = U(gen);
    return v;
}

}  // namespace

TEST(NeumannOperator, ConstantsHaveNoFlux) {
    for (int dim : {1, 2}) {
        auto g = grid_spec::make(dim, 0.25, 0.5, 1.0);
        auto st = build_stencil(constant_kernel(0.5, dim), g, 1, 1e-12);
        auto lay = scheme_layout::make(dim, g.M, g.L);
        auto plan = operator_plan::make(st, lay);
        std::vector<double> u(lay.lattice.size(), 3.7);
        for (double v : neumann_operator(plan, lay, u)) EXPECT_NEAR(v, 0.0, 1e-14);
    }
}

TEST(NeumannOperator, SingleNeighbourHandValue) {
    const double h = 0.1;
    auto st = stencil_from_coefficients(1, 1, h, {2.5, 0.0, 2.5});
    auto lay = scheme_layout::make(1, 3, 1);
    auto plan = operator_plan::make(st, lay);
    std::vector<double> u = {7.0, 1.0, 2.0, 3.0, 4.0, 5.0, -2.0};   // k = -3..3
    auto n = neumann_operator(plan, lay, u);
    ASSERT_EQ(n.size(), 2u);
    EXPECT_NEAR(n[0], -h * 2.5 * (1.0 - 7.0), 1e-14);    // k = -2, ghost -3
    EXPECT_NEAR(n[1], -h * 2.5 * (5.0 - -2.0), 1e-14);   // k = 2, ghost 3
}

TEST(NeumannOperator, DiscreteGreenIdentity) {
    for (int dim : {1, 2}) {
        auto g = grid_spec::make(dim, 0.125, 0.25, 0.75);
        auto st = build_stencil(nonintegrable_kernel(0.25, dim), g, 1, 1e-12);
        auto lay = scheme_layout::make(dim, g.M, g.L);
        auto plan = operator_plan::make(st, lay);
        lattice_field u(lay.lattice), v(lay.lattice);
        u.values = random_field(lay.lattice.size(), 3);
        v.values = random_field(lay.lattice.size(), 4);
        auto data = neumann_operator(plan, lay, u.values);
        std::vector<double> Lu(lay.lattice.size(), 0.0);
        apply_scheme_operator(plan, lay, u.values, Lu, &data);
        double lhs = 0.0;
        for (int k : lay.interior) lhs += Lu[k] * v.values[k];
        lhs *= std::pow(g.h, dim);
        double rhs = seminorm(st, u, v, g.M);
        for (std::size_t q = 0; q < lay.inner.size(); ++q) rhs -= data[q] * v.values[lay.inner[q]];
        EXPECT_NEAR(lhs, rhs, 1e-11 * (std::abs(lhs) + 1.0)) << "dim " << dim;
    }
}

TEST(NeumannOperator, NeumannFormMatchesFullOperator) {
    // with the ghost layer filled, the interior-only form plus Neumann data is the c-form
    const auto& s = one_d();
    auto plan = operator_plan::make(s.st, s.lay);
    auto u = random_field(s.lay.lattice.size(), 9);
    auto data = neumann_operator(plan, s.lay, u);
    std::vector<double> a(u.size(), 0.0), b(u.size(), 0.0);
    apply_scheme_operator(plan, s.lay, u, a);
    apply_scheme_operator(plan, s.lay, u, b, &data);
    for (int k : s.lay.interior) EXPECT_NEAR(a[k], b[k], 1e-10 * s.st.c_l1());
}

TEST(BoundaryTable, ScalarMapForSingleNeighbourStencil) {
    const double h = 0.1, tau = 0.02;
    auto st = stencil_from_coefficients(1, 1, h, {100.0, 0.0, 100.0});
    auto grid = grid_spec::make(1, h, h, 0.5);
    const int N = 40;
    auto c = contour_spec::make(N);
    auto t = build_boundary_table(grid, st, c, N, tau);
    ASSERT_EQ(t.n_ghost, 2);
    ASSERT_EQ(t.n_inner, 2);
    std::vector<cplx> samples(c.P);
    for (int p = 1; p <= c.P; ++p) samples[p - 1] = kcaret_scalar(s_of_z(c.node(p), tau), st.c_at({0, 0}));
    for (int j = 0; j <= N; ++j) {
        double expect = inverse_ztransform(samples, j, c);
        EXPECT_NEAR(t.at(j, 1, 1), expect, 1e-10) << j;   // right end
        EXPECT_NEAR(t.at(j, 0, 0), expect, 1e-10) << j;   // left end
        EXPECT_EQ(t.at(j, 0, 1), 0.0);
    }
}

TEST(BoundaryTable, CausalAndContourIndependent) {
    const auto& s = one_d();
    const double tau = 1.0 / 64;
    const int N = 48;
    auto coarse = build_boundary_table(s.grid, s.st, contour_spec::make(N, 2 * N), N, tau);
    auto fine = build_boundary_table(s.grid, s.st, contour_spec::make(N, 4 * N), N, tau);
    // the exterior field at level 0 is zero whatever the inner values
    for (double v : coarse.block(0)) EXPECT_NEAR(v, 0.0, 1e-9);
    double diff = 0.0;
    for (std::size_t i = 0; i < coarse.data.size(); ++i)
        diff = std::max(diff, std::abs(coarse.data[i] - fine.data[i]));
    EXPECT_LE(diff, 1e-9 * std::max(1.0, coarse.max_abs()));
}

TEST(BoundaryTable, ImpulseHistoryReadsOffColumn) {
    const auto& s = one_d();
    const int N = 20;
    auto t = build_boundary_table(s.grid, s.st, contour_spec::make(N), N, 1.0 / 64);
    inner_history hist{t.n_inner, {}};
    std::vector<double> level(t.n_inner, 0.0);
    const int col = 3;
    level[col] = 1.0;
    hist.push(level);
    level[col] = 0.0;
    std::vector<double> ghost(t.n_ghost);
    for (int n = 0; n <= N; ++n) {
        if (n > 0) hist.push(level);
        apply_dtd_bc(t, hist, n, ghost);
        for (int g = 0; g < t.n_ghost; ++g) EXPECT_EQ(ghost[g], t.at(n, g, col));
    }
    hist.push(level);
    EXPECT_THROW(apply_dtd_bc(t, hist, N + 1, ghost), table_exhausted_error);
}

TEST(BoundaryTable, ZeroHistoryGivesZeroGhosts) {
    const auto& s = one_d();
    auto t = build_boundary_table(s.grid, s.st, contour_spec::make(0), 0, 1.0 / 64);
    EXPECT_EQ(t.N, 0);
    inner_history hist{t.n_inner, std::vector<double>(t.n_inner, 0.0)};
    std::vector<double> ghost(t.n_ghost, 1.0);
    apply_dtd_bc(t, hist, 0, ghost);
    for (double v : ghost) EXPECT_EQ(v, 0.0);
}

namespace {

problem gaussian_problem(const grid_spec& g, double tau, int N, bc_mode bc) {
    problem pb;
    pb.grid = g;
    pb.time = {tau, N};
    pb.phi = [](std::span<const double> x) { return std::exp(-100.0 * x[0] * x[0]); };
    pb.psi = nullptr;
    pb.bc = bc;
    pb.keep_levels = true;
    return pb;
}

}  // namespace

TEST(BoundaryModes, DtdAndDtnAgree) {
    const auto& s = one_d();
    const double tau = 1.0 / 64;
    const int N = 96;
    auto t = build_boundary_table(s.grid, s.st, contour_spec::make(N), N, tau);
    auto a = solve(gaussian_problem(s.grid, tau, N, bc_mode::dtd), s.st, &t);
    auto b = solve(gaussian_problem(s.grid, tau, N, bc_mode::dtn), s.st, &t);
    ASSERT_EQ(a.levels.size(), b.levels.size());
    double diff = 0.0;
    for (std::size_t n = 0; n < a.levels.size(); ++n)
        for (std::size_t i = 0; i < a.levels[n].size(); ++i)
            diff = std::max(diff, std::abs(a.levels[n][i] - b.levels[n][i]));
    EXPECT_LE(diff, 1e-12);
}

TEST(BoundaryModes, TransparentAgainstFreeSpace) {
    const auto& s = one_d();
    const double tau = 1.0 / 64;
    const int N = 96;
    auto t = build_boundary_table(s.grid, s.st, contour_spec::make(N, 4 * N), N, tau);
    auto pb = gaussian_problem(s.grid, tau, N, bc_mode::dtn);
    auto abc = solve(pb, s.st, &t);
    auto free = solve_free_space(pb, s.st);
    EXPECT_LE(reflection_coefficient(abc.levels, free.levels).max, 1e-8);
    pb.bc = bc_mode::zero_dirichlet;
    auto wall = solve(pb, s.st, nullptr);
    EXPECT_GT(reflection_coefficient(wall.levels, free.levels).max, 1e-2);
}

TEST(BoundaryModes, ShortTableIsRejected) {
    const auto& s = one_d();
    auto t = build_boundary_table(s.grid, s.st, contour_spec::make(10), 10, 1.0 / 64);
    EXPECT_THROW(solve(gaussian_problem(s.grid, 1.0 / 64, 11, bc_mode::dtn), s.st, &t), table_exhausted_error);
}

TEST(TableCache, RoundTripAndCorruption) {
    const auto& s = one_d();
    const int N = 12;
    const double tau = 1.0 / 64;
    auto c = contour_spec::make(N);
    auto dir = std::filesystem::temp_directory_path() / "nlwave_test_table_cache";
    std::filesystem::remove_all(dir);
    auto [built, hit0] = cached_table(dir, s.grid, s.st, c, N, tau);
    EXPECT_FALSE(hit0);
    auto [loaded, hit1] = cached_table(dir, s.grid, s.st, c, N, tau);
    EXPECT_TRUE(hit1);
    EXPECT_EQ(built.data, loaded.data);

    auto path = table_cache_path(dir, table_key(s.st.hash(), s.grid, tau, N, c));
    EXPECT_THROW(load_table(path, s.st.hash(), s.grid, 2.0 * tau, N, c), cache_error);
    EXPECT_THROW(load_table(path, s.st.hash() ^ 1u, s.grid, tau, N, c), cache_error);
    std::filesystem::resize_file(path, std::filesystem::file_size(path) - 8);
    EXPECT_THROW(load_table(path, s.st.hash(), s.grid, tau, N, c), cache_error);
    {
        std::ofstream junk(path, std::ios::binary | std::ios::trunc);
        junk << "not a table";
    }
    EXPECT_THROW(load_table(path, s.st.hash(), s.grid, tau, N, c), cache_error);
    std::filesystem::remove_all(dir);
}
