#include <gtest/gtest.h>

#include <cmath>

#include "nlwave/quadrature.hpp"

using namespace nlwave;

TEST(GaussLegendre, ExactForPolynomialsUpToDegree2nMinus1) {
    for (int n : {2, 5, 10, 16}) {
        const auto& r = quad::gauss_legendre(n);
        for (int deg = 0; deg <= 2 * n - 1; ++deg) {
            double sum = 0.0;
            for (int i = 0; i < n; ++i) sum += r.weights[i] * std::pow(r.nodes[i], deg);
            double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
            EXPECT_NEAR(sum, exact, 1e-14) << "n=" << n << " deg=" << deg;
        }
    }
}

TEST(Adaptive, EndpointSingularity1D) {
    quad::adaptive_options opt;
    opt.tol = 1e-12;
    double v = quad::integrate([](const double* s) { return 1.0 / std::sqrt(s[0]); },
                               quad::box{1, {0.0, 0.0}, {1.0, 0.0}}, opt);
    EXPECT_NEAR(v, 2.0, 1e-11);
}

TEST(Adaptive, CornerSingularity2D) {
    quad::adaptive_options opt;
    opt.tol = 1e-11;
    double v = quad::integrate([](const double* s) { return 1.0 / std::hypot(s[0], s[1]); },
                               quad::box{2, {0.0, 0.0}, {1.0, 1.0}}, opt);
    EXPECT_NEAR(v, 2.0 * std::log(1.0 + std::sqrt(2.0)), 1e-10);
}

TEST(Adaptive, VectorValuedComponents) {
    auto f = [](const double* s, double* out) {
        out[0] = 1.0;
        out[1] = s[0];
        out[2] = std::exp(s[0]);
    };
    auto r = quad::integrate_adaptive(f, quad::box{1, {0.0, 0.0}, {2.0, 0.0}}, 3);
    EXPECT_NEAR(r.value[0], 2.0, 1e-14);
    EXPECT_NEAR(r.value[1], 2.0, 1e-14);
    EXPECT_NEAR(r.value[2], std::exp(2.0) - 1.0, 1e-12);
}

TEST(Adaptive, NonConvergenceReportsAchievedTolerance) {
    quad::adaptive_options opt;
    opt.tol = 1e-15;
    opt.max_regions = 8;
    try {
        quad::integrate([](const double* s) { return std::pow(s[0], -0.9); },
                        quad::box{1, {0.0, 0.0}, {1.0, 0.0}}, opt);
        FAIL() << "expected quadrature_failure";
    } catch (const quadrature_failure& e) {
        EXPECT_GT(e.achieved_tolerance, opt.tol);
        EXPECT_NE(std::string(e.what()).find("worst cell"), std::string::npos);
    }
}
