#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nlwave/stencil.hpp"

using namespace nlwave;

namespace {

std::vector<kernel_spec> families(double delta, int dim) {
    return {constant_kernel(delta, dim), nonintegrable_kernel(delta, dim), fractional_kernel(delta, dim, 0.5),
            fractional_kernel(delta, dim, 0.25), gaussian_kernel(delta, dim, 50.0, 5.0)};
}

// Composite midpoint rule for a_m with the hat basis of node m (p = 1, d = 1),
// written independently of the library quadrature.
double midpoint_coefficient(double gamma, double h, int m, double delta, int panels) {
    const double ds = 2.0 * delta / panels;
    double acc = 0.0;
    for (int i = 0; i < panels; ++i) {
        double s = -delta + (i + 0.5) * ds;
        double hat = std::max(0.0, 1.0 - std::abs(s / h - m));
        acc += hat * std::abs(s) * gamma * ds;
    }
    return acc / std::abs(h * m);
}

}  // namespace

TEST(BuildStencil, MatchesBruteForceMidpointOracle) {
    auto g = grid_spec::make(1, 0.5, 1.0, 2.0);
    auto st = build_stencil(constant_kernel(1.0, 1), g, 1, 1e-14);
    for (int m : {1, 2}) {
        double oracle = midpoint_coefficient(3.0, 0.5, m, 1.0, 1000000);
        EXPECT_NEAR(st.a_at({m, 0}), oracle, 1e-8 * oracle) << "m=" << m;
    }
}

TEST(BuildStencil, SymmetryAndZeroCentre) {
    for (int dim : {1, 2}) {
        auto g = grid_spec::make(dim, 0.125, 0.5, 1.0);
        for (const auto& k : families(0.5, dim)) {
            for (int p : {1, 2}) {
                auto st = build_stencil(k, g, p, 1e-12);
                EXPECT_EQ(st.a_at({0, 0}), 0.0);
                double csum = 0.0;
                for (int i = 0; i < st.size(); ++i) {
                    multi_index m = st.offset(i);
                    EXPECT_NEAR(st.a[i], st.a_at(-m), 1e-13 * st.a_max());
                    if (dim == 2) {
                        EXPECT_NEAR(st.a[i], st.a_at({m[1], m[0]}), 1e-13 * st.a_max());
                    }
                    csum += st.c[i];
                }
                EXPECT_NEAR(csum, 0.0, 1e-13 * st.c_l1());
                if (p == 1) {
                    EXPECT_TRUE(st.nonnegative()) << to_string(k.family);
                }
            }
        }
    }
}

TEST(BuildStencil, ConstantKernelNonnegativeForAnyMesh) {
    for (double h : {0.25, 0.125, 1.0 / 24, 1.0 / 64}) {
        auto st = build_stencil(constant_kernel(0.5, 1), grid_spec::make(1, h, 0.5, 1.0), 1, 1e-13);
        EXPECT_TRUE(st.nonnegative());
    }
}

TEST(BuildStencil, RejectsHorizonNotMultipleOfDegree) {
    auto g = grid_spec::make(1, 0.2, 1.0, 2.0);   // L = 5
    EXPECT_THROW(build_stencil(constant_kernel(1.0, 1), g, 2, 1e-12), config_error);
    EXPECT_NO_THROW(build_stencil(constant_kernel(1.0, 1), g, 5, 1e-12));
}

TEST(BuildStencil, OuterShellIsComputedHonestly) {
    auto st = build_stencil(constant_kernel(1.0, 1), grid_spec::make(1, 0.25, 1.0, 2.0), 1, 1e-13);
    EXPECT_GT(st.shell_magnitude(), 0.0);
}

TEST(BuildStencil, CflConstant) {
    auto st = build_stencil(constant_kernel(1.0, 1), grid_spec::make(1, 0.5, 1.0, 2.0), 1, 1e-13);
    EXPECT_NEAR(st.S, 2.0 * 4.0 * 1.5, 1e-12);   // 2((2L+1) - 1) |a|_inf with |a|_inf = a_1 = 3/2
}

TEST(ApplyOperator, AnnihilatesConstantsAndRamps) {
    auto st = build_stencil(fractional_kernel(0.25, 1, 0.5), grid_spec::make(1, 1.0 / 32, 0.25, 1.0), 2, 1e-13);
    box_lattice lat{1, 40};
    auto seven = sample(lat, st.h, [](std::span<const double>) { return 7.0; });
    auto ramp = sample(lat, st.h, [](std::span<const double> x) { return x[0]; });
    for (int k = -20; k <= 20; ++k) {
        EXPECT_NEAR(apply_operator(st, seven, {k, 0}), 0.0, 1e-12 * st.c_l1() * 7.0);
        EXPECT_NEAR(apply_operator(st, ramp, {k, 0}), 0.0, 1e-12 * st.c_l1());
    }
    EXPECT_THROW(apply_operator(st, seven, {35, 0}), out_of_range_error);
}

TEST(ApplyOperator, CFormMatchesDoubleSumOnRandomField) {
    auto st = build_stencil(constant_kernel(0.25, 1), grid_spec::make(1, 1.0 / 16, 0.25, 1.0), 1, 1e-13);
    box_lattice lat{1, 16};   // 31 points
    std::mt19937 gen(3);
    std::normal_distribution<double> N01;
    lattice_field u(lat);
    for (auto& v : u.values) v = N01(gen);
    for (int k = -(16 - 1 - st.L); k <= 16 - 1 - st.L; ++k) {
        double direct = 0.0;
        for (int m = k - st.L; m <= k + st.L; ++m) direct += st.a_at({k - m, 0}) * (u[{k, 0}] - u[{m, 0}]);
        EXPECT_NEAR(apply_operator(st, u, {k, 0}), direct, 1e-13 * (1.0 + std::abs(direct)) * st.c_l1());
    }
}

TEST(ApplyOperator, LinearAndPositiveSemidefinite) {
    std::mt19937 gen(11);
    std::normal_distribution<double> N01;
    for (int dim : {1, 2}) {
        auto st = build_stencil(nonintegrable_kernel(0.25, dim), grid_spec::make(dim, 0.0625, 0.25, 1.0), 1, 1e-12);
        box_lattice lat{dim, 12};
        lattice_field u(lat), v(lat), w(lat);
        for (int i = 0; i < lat.size(); ++i) {
            multi_index k = lat.at(i);
            bool inside = inf_norm(k, dim) < 12 - st.L;   // compact support with a zero collar
            u.values[i] = inside ? N01(gen) : 0.0;
            v.values[i] = inside ? N01(gen) : 0.0;
        }
        const double alpha = 1.7, beta = -0.4;
        for (int i = 0; i < lat.size(); ++i) w.values[i] = alpha * u.values[i] + beta * v.values[i];
        double quad_form = 0.0;
        for (int i = 0; i < lat.size(); ++i) {
            multi_index k = lat.at(i);
            if (inf_norm(k, dim) >= 12 - st.L) continue;
            double lw = apply_operator(st, w, k);
            double lin = alpha * apply_operator(st, u, k) + beta * apply_operator(st, v, k);
            EXPECT_NEAR(lw, lin, 1e-12 * (1.0 + std::abs(lw)));
            quad_form += apply_operator(st, u, k) * u.values[i];
        }
        EXPECT_GE(quad_form * std::pow(st.h, dim), -1e-10);
    }
}

TEST(StencilFromCoefficients, DerivesCAndS) {
    auto st = stencil_from_coefficients(1, 2, 0.1, {0.5, 2.0, 9.0, 2.0, 0.5});
    EXPECT_EQ(st.a_at({0, 0}), 0.0);
    EXPECT_DOUBLE_EQ(st.c_at({0, 0}), 5.0);
    EXPECT_DOUBLE_EQ(st.c_at({1, 0}), -2.0);
    EXPECT_DOUBLE_EQ(st.S, 2.0 * 4.0 * 2.0);
    EXPECT_THROW(stencil_from_coefficients(1, 2, 0.1, {1.0, 2.0}), shape_error);
}

TEST(TruncationProbe, OrdersForConstantKernel) {
    auto u = [](std::span<const double> x) { return std::exp(-x[0] * x[0]); };
    std::vector<double> ladder{1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
    EXPECT_NEAR(truncation_order_probe(constant_kernel(0.75, 1), 1, u, ladder).slope, 2.0, 0.3);
    EXPECT_NEAR(truncation_order_probe(constant_kernel(0.75, 1), 2, u, ladder).slope, 4.0, 0.3);
    EXPECT_NEAR(truncation_order_probe(constant_kernel(0.75, 1), 3, u, ladder).slope, 4.0, 0.3);
}

TEST(TruncationProbe, RoundoffLadderIsInconclusive) {
    // quadratics are reproduced exactly for p = 2, so the ladder is pure roundoff
    auto u = [](std::span<const double> x) { return 1.0 + x[0] * x[0]; };
    std::vector<double> ladder{1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
    probe_options opt;
    opt.floor = 0.0;
    EXPECT_THROW(truncation_order_probe(constant_kernel(0.75, 1), 2, u, ladder, opt), probe_inconclusive_error);
}
