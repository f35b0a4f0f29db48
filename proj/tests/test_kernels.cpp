#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>

#include "nlwave/kernels.hpp"

using namespace nlwave;

namespace {
double eval1(const kernel_spec& k, double a) { return kernel_eval(k, a); }
double eval2(const kernel_spec& k, double a, double b) {
    double v[2] = {a, b};
    return kernel_eval(k, std::span<const double>(v, 2));
}
}  // namespace

TEST(KernelEval, ConstantFamily1D) { EXPECT_DOUBLE_EQ(eval1(constant_kernel(1.0, 1), 0.5), 3.0); }

TEST(KernelEval, ZeroOutsideHorizon) {
    for (auto k : {constant_kernel(0.5, 1), nonintegrable_kernel(0.5, 1), fractional_kernel(0.5, 1, 0.3),
                   gaussian_kernel(0.5, 1, 50.0, 5.0)})
        EXPECT_EQ(eval1(k, 0.75), 0.0);
    EXPECT_EQ(eval2(constant_kernel(0.5, 2), 0.75, 0.1), 0.0);
}

TEST(KernelEval, FractionalHalfMatchesGammaOracle) {
    // 2^{2nu} nu Gamma(nu + d/2) / (sqrt(pi) Gamma(1 - nu)) |a|^{-d-2nu}, nu = 1/2, d = 1, a = 1/2;
    // reference value 4/pi from a 30-digit evaluation
    EXPECT_NEAR(eval1(fractional_kernel(1.0, 1, 0.5), 0.5), 1.2732395447351627, 1e-14);
}

TEST(KernelEval, SingularFamiliesRejectOrigin) {
    EXPECT_THROW(eval1(nonintegrable_kernel(1.0, 1), 0.0), domain_error);
    EXPECT_THROW(eval2(fractional_kernel(1.0, 2, 0.4), 0.0, 0.0), domain_error);
    EXPECT_NO_THROW(eval1(constant_kernel(1.0, 1), 0.0));
}

TEST(KernelEval, RadialAndEven) {
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> U(-0.6, 0.6);
    for (auto k : {constant_kernel(1.0, 2), nonintegrable_kernel(1.0, 2), fractional_kernel(1.0, 2, 0.7),
                   gaussian_kernel(1.0, 2, 50.0, 5.0)}) {
        for (int i = 0; i < 50; ++i) {
            double a = U(gen), b = U(gen);
            double r = std::hypot(a, b), th = 2.0 * U(gen);
            EXPECT_NEAR(eval2(k, a, b), eval2(k, r * std::cos(th), r * std::sin(th)), 1e-12 * eval2(k, a, b));
            EXPECT_EQ(eval2(k, a, b), eval2(k, -a, -b));
            EXPECT_GE(eval2(k, a, b), 0.0);
        }
    }
}

TEST(KernelSpec, Validation) {
    EXPECT_THROW(fractional_kernel(1.0, 1, 1.0).validate(), config_error);
    EXPECT_THROW(fractional_kernel(1.0, 1, 0.0).validate(), config_error);
    EXPECT_THROW(constant_kernel(-1.0, 1).validate(), config_error);
    EXPECT_THROW(constant_kernel(1.0, 3).validate(), config_error);
    EXPECT_THROW(parse_kernel_family("cubic"), config_error);
    EXPECT_EQ(parse_kernel_family("fractional"), kernel_family::fractional);
}

TEST(KernelSpec, CustomProfileInterpolates) {
    kernel_spec k = make_kernel(kernel_family::custom, 1.0, 1);
    k.profile = {{0.0, 2.0}, {0.5, 1.0}, {0.8, 0.0}};
    EXPECT_DOUBLE_EQ(eval1(k, 0.25), 1.5);
    EXPECT_DOUBLE_EQ(eval1(k, -0.65), 0.5);
    EXPECT_DOUBLE_EQ(eval1(k, 0.9), 0.0);
    k.profile = {{0.0, 1.0}, {0.0, 2.0}};
    EXPECT_THROW(k.validate(), config_error);
}

TEST(WeightEval, Examples) {
    double a[1] = {0.25};
    EXPECT_DOUBLE_EQ(weight_eval(std::span<const double>(a, 1)), 0.25);
    double b[2] = {1.0, 1.0};
    EXPECT_DOUBLE_EQ(weight_eval(std::span<const double>(b, 2)), 1.0);
    double c[2] = {3.0, 4.0};
    EXPECT_NEAR(weight_eval(std::span<const double>(c, 2)), 25.0 / 7.0, 1e-15);
    double z[2] = {0.0, 0.0};
    EXPECT_THROW(weight_eval(std::span<const double>(z, 2)), domain_error);
}

TEST(SecondMoment, ConstantKernelIsNormalisedToDimension) {
    for (double delta : {0.1, 0.5, 2.0}) {
        EXPECT_NEAR(second_moment(constant_kernel(delta, 1), 1e-12), 1.0, 1e-12);
        EXPECT_NEAR(second_moment(constant_kernel(delta, 2), 1e-12), 2.0, 1e-12);
    }
}

TEST(SecondMoment, GaussianIsFiniteAndPositive) {
    double m = second_moment(gaussian_kernel(0.5, 2, 50.0, 5.0), 1e-12);
    EXPECT_TRUE(std::isfinite(m));
    EXPECT_GT(m, 0.0);
}

TEST(SecondMoment, NonintegrableKernelIsNormalised) {
    // (1/2) int_{-d}^{d} a^2 2/(|a| d^2) da = 1
    EXPECT_NEAR(second_moment(nonintegrable_kernel(0.3, 1), 1e-12), 1.0, 1e-11);
}
