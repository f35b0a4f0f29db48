#include <gtest/gtest.h>

#include "nlwave/reference.hpp"

using namespace nlwave;

namespace {

double symbol1(const kernel_spec& k, double xi) {
    double x[1] = {xi};
    return kernel_symbol(k, x);
}

field_fn bump() {
    return [](std::span<const double> x) {
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        return std::exp(-50.0 * r2);
    };
}

field_fn none() {
    return [](std::span<const double>) { return 0.0; };
}

}  // namespace

TEST(KernelSymbol, ZeroAtOriginAndNonnegative) {
    for (const auto& k : {constant_kernel(0.5, 1), nonintegrable_kernel(0.5, 1), fractional_kernel(0.5, 1, 0.5)}) {
        EXPECT_EQ(symbol1(k, 0.0), 0.0);
        for (double xi : {0.3, 1.0, 7.0, 40.0}) EXPECT_GT(symbol1(k, xi), 0.0);
    }
}

TEST(KernelSymbol, LocalLimitOfConstantKernel) {
    // the second moment is normalised to 1, so sigma -> xi^2 as delta xi -> 0
    for (int dim : {1, 2}) {
        auto k = constant_kernel(0.1, dim);
        for (double xi : {0.1, 0.5, 1.0}) {
            double x[2] = {xi, 0.0};
            EXPECT_NEAR(kernel_symbol(k, std::span<const double>(x, dim)) / (xi * xi), 1.0, 0.02);
        }
    }
}

TEST(KernelSymbol, ClosedFormInOneDimension) {
    // constant 1D kernel: sigma = 6/delta^3 * (delta - sin(xi delta) / xi)
    auto k = constant_kernel(0.5, 1);
    for (double xi : {0.7, 3.0, 11.0}) {
        double exact = 6.0 / 0.125 * (0.5 - std::sin(0.5 * xi) / xi);
        EXPECT_NEAR(symbol1(k, xi), exact, 1e-11 * exact);
    }
}

TEST(SpectralReference, ModeDoublingConverges) {
    auto k = constant_kernel(0.25, 1);
    std::vector<std::array<double, 2>> pts;
    for (int i = -10; i <= 10; ++i) pts.push_back({0.05 * i, 0.0});
    reference_options a, b;
    a.half_width = b.half_width = 3.0;
    a.modes = 256;
    b.modes = 512;
    auto ua = pseudo_spectral_reference(k, bump(), none(), nullptr, 0.5, pts, a);
    auto ub = pseudo_spectral_reference(k, bump(), none(), nullptr, 0.5, pts, b);
    for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_NEAR(ua[i], ub[i], 1e-8);
}

TEST(SpectralReference, EnergyIsConserved) {
    auto k = nonintegrable_kernel(0.25, 1);
    reference_options opt;
    opt.half_width = 6.0;
    opt.modes = 512;
    auto e0 = spectral_solution(k, bump(), bump(), nullptr, 0.0, opt).energy();
    for (double T : {0.3, 0.9}) EXPECT_NEAR(spectral_solution(k, bump(), bump(), nullptr, T, opt).energy(), e0, 1e-10 * e0);
}

TEST(SpectralReference, SourceMatchesEquivalentVelocity) {
    // a source f(x, t) = psi(x) on [0, T] drives the mode like t -> int_0^t sin(w (t-s))/w ds psi_hat
    auto k = constant_kernel(0.25, 1);
    reference_options opt;
    opt.half_width = 3.0;
    opt.modes = 128;
    source_fn f = [](std::span<const double> x, double) { return std::exp(-50.0 * x[0] * x[0]); };
    auto s = spectral_solution(k, none(), none(), &f, 0.4, opt);
    for (std::size_t i = 0; i < s.coef.size(); i += 7) {
        double w = std::sqrt(s.sigma[i]);
        auto psi_hat = spectral_solution(k, none(), bump(), nullptr, 0.0, opt).rate[i];
        cplx expect = w > 0.0 ? psi_hat * (1.0 - std::cos(w * 0.4)) / (w * w) : psi_hat * 0.08;
        EXPECT_NEAR(std::abs(s.coef[i] - expect), 0.0, 1e-12);
    }
}

TEST(SpectralReference, SmallBoxIsDetected) {
    reference_options opt;
    opt.half_width = 0.3;
    opt.modes = 64;
    EXPECT_THROW(spectral_solution(constant_kernel(0.25, 1), bump(), none(), nullptr, 0.5, opt),
                 domain_too_small_error);
}
