#pragma once

// Horizon-limited radial kernel families, the asymptotically compatible
// weight w(z) = |z|_2^2 / |z|_1, and moment checks.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nlwave/errors.hpp"
#include "nlwave/quadrature.hpp"

namespace nlwave {

enum class kernel_family { constant, nonintegrable, fractional, gaussian, custom };

inline std::string to_string(kernel_family f) {
    switch (f) {
    case kernel_family::constant: return "constant";
    case kernel_family::nonintegrable: return "nonintegrable";
    case kernel_family::fractional: return "fractional";
    case kernel_family::gaussian: return "gaussian";
    case kernel_family::custom: return "custom";
    }
    return "?";
}

inline kernel_family parse_kernel_family(std::string_view name) {
    if (name == "constant") return kernel_family::constant;
    if (name == "nonintegrable") return kernel_family::nonintegrable;
    if (name == "fractional") return kernel_family::fractional;
    if (name == "gaussian") return kernel_family::gaussian;
    if (name == "custom") return kernel_family::custom;
    throw config_error(detail::concat("unknown kernel family '", name, "'"));
}

struct kernel_spec {
    kernel_family family = kernel_family::constant;
    double delta = 1.0;
    int dim = 1;
    double nu = 0.5;          // fractional only
    double amplitude = 1.0;   // gaussian / custom scale
    double rate = 0.0;        // gaussian exp(-rate |a|^2)
    /// custom: radial samples (r, value), increasing r; linear in between, zero beyond
    std::vector<std::pair<double, double>> profile;

    /// True when gamma diverges at the origin.
    bool singular() const {
        return family == kernel_family::nonintegrable || family == kernel_family::fractional;
    }

    /// w * gamma ~ r^{1-d-2nu} near the origin for the fractional family, so it
    /// is integrable only for nu < 1/2. The Lagrange basis of any node m != 0
    /// vanishes at the origin, which keeps the stencil integrals finite anyway.
    bool integrable_against_weight() const {
        if (family == kernel_family::fractional) return nu < 0.5;
        return true;
    }

    void validate() const {
        if (!(delta > 0.0)) throw config_error("kernel horizon delta must be positive");
        if (dim != 1 && dim != 2) throw config_error("kernel dimension must be 1 or 2");
        if (family == kernel_family::fractional && !(nu > 0.0 && nu < 1.0))
            throw config_error("fractional kernel requires 0 < nu < 1");
        if ((family == kernel_family::gaussian || family == kernel_family::custom) &&
            !(amplitude > 0.0))
            throw config_error("kernel amplitude must be positive");
        if (family == kernel_family::gaussian && rate < 0.0)
            throw config_error("gaussian rate must be non-negative");
        if (family == kernel_family::custom) {
            if (profile.empty()) throw config_error("custom kernel needs a radial profile");
            for (std::size_t i = 0; i < profile.size(); ++i) {
                if (profile[i].second < 0.0) throw config_error("custom kernel profile must be >= 0");
                if (i > 0 && !(profile[i].first > profile[i - 1].first))
                    throw config_error("custom kernel radii must be strictly increasing");
            }
        }
    }
};

inline kernel_spec make_kernel(kernel_family f, double delta, int dim) {
    kernel_spec k;
    k.family = f;
    k.delta = delta;
    k.dim = dim;
    return k;
}
inline kernel_spec constant_kernel(double delta, int dim) {
    return make_kernel(kernel_family::constant, delta, dim);
}
inline kernel_spec nonintegrable_kernel(double delta, int dim) {
    return make_kernel(kernel_family::nonintegrable, delta, dim);
}
inline kernel_spec fractional_kernel(double delta, int dim, double nu) {
    kernel_spec k = make_kernel(kernel_family::fractional, delta, dim);
    k.nu = nu;
    return k;
}
inline kernel_spec gaussian_kernel(double delta, int dim, double amplitude, double rate) {
    kernel_spec k = make_kernel(kernel_family::gaussian, delta, dim);
    k.amplitude = amplitude;
    k.rate = rate;
    return k;
}

/// 2^{2nu} nu Gamma(nu + d/2) / (sqrt(pi) Gamma(1 - nu))
inline double fractional_constant(double nu, int dim) {
    return std::pow(2.0, 2.0 * nu) * nu * std::tgamma(nu + 0.5 * dim) /
           (std::sqrt(std::numbers::pi) * std::tgamma(1.0 - nu));
}

/// Radial profile gamma(r), r = |alpha|_2 > 0, ignoring the horizon cut.
inline double radial_profile(const kernel_spec& k, double r) {
    const double d = k.dim;
    switch (k.family) {
    case kernel_family::constant: return 3.0 / d * std::pow(k.delta, -2.0 - d);
    case kernel_family::nonintegrable: return 2.0 / (r * k.delta * k.delta);
    case kernel_family::fractional: return fractional_constant(k.nu, k.dim) * std::pow(r, -d - 2.0 * k.nu);
    case kernel_family::gaussian: return k.amplitude * std::exp(-k.rate * r * r);
    case kernel_family::custom: {
        const auto& p = k.profile;
        if (r > p.back().first) return 0.0;
        if (r <= p.front().first) return k.amplitude * p.front().second;
        auto it = std::upper_bound(p.begin(), p.end(), r,
                                   [](double v, const auto& e) { return v < e.first; });
        const auto& hi = *it;
        const auto& lo = *(it - 1);
        double t = (r - lo.first) / (hi.first - lo.first);
        return k.amplitude * ((1.0 - t) * lo.second + t * hi.second);
    }
    }
    return 0.0;
}

/// gamma(alpha); zero outside the square horizon |alpha|_inf <= delta.
/// Singular families reject alpha = 0.
inline double kernel_eval(const kernel_spec& k, std::span<const double> alpha) {
    double inf = 0.0, r2 = 0.0;
    for (int i = 0; i < k.dim; ++i) {
        inf = std::max(inf, std::abs(alpha[i]));
        r2 += alpha[i] * alpha[i];
    }
    if (inf > k.delta) return 0.0;
    if (r2 == 0.0 && k.singular())
        throw domain_error(detail::concat(to_string(k.family),
                                          " kernel is singular at the origin"));
    return radial_profile(k, std::sqrt(r2));
}

inline double kernel_eval(const kernel_spec& k, double alpha) {
    double a[2] = {alpha, 0.0};
    return kernel_eval(k, std::span<const double>(a, 2));
}

/// w(z) = |z|_2^2 / |z|_1
inline double weight_eval(std::span<const double> z) {
    double r2 = 0.0, l1 = 0.0;
    for (double v : z) {
        r2 += v * v;
        l1 += std::abs(v);
    }
    if (l1 == 0.0) throw domain_error("weight function undefined at the origin");
    return r2 / l1;
}

/// (1/2) int_{B_delta(0)} |alpha|^2 gamma(alpha) d alpha, by adaptive cubature
/// on the positive quadrant (the integrand is even in every coordinate).
inline double second_moment(const kernel_spec& k, double quad_tol) {
    k.validate();
    quad::box b{k.dim, {0.0, 0.0}, {k.delta, k.dim == 2 ? k.delta : 0.0}};
    auto f = [&](const double* s) {
        double r2 = s[0] * s[0] + (k.dim == 2 ? s[1] * s[1] : 0.0);
        return r2 * radial_profile(k, std::sqrt(r2));
    };
    quad::adaptive_options opt;
    opt.tol = quad_tol / (1 << k.dim);
    opt.order = 12;
    double quadrant = quad::integrate(f, b, opt);
    return 0.5 * quadrant * (1 << k.dim);
}

} // namespace nlwave
