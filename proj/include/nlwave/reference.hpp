#pragma once

// Pseudo-spectral continuum reference on a periodic box [-W, W)^d. Each
// Fourier mode obeys u'' + sigma(xi) u = f with
//   sigma(xi) = int_{B_delta} (1 - cos(xi . alpha)) gamma(alpha) d alpha,
// and is propagated exactly in time.

#include <fftw3.h>

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "nlwave/cache.hpp"
#include "nlwave/errors.hpp"
#include "nlwave/kernels.hpp"
#include "nlwave/quadrature.hpp"
#include "nlwave/ztransform.hpp"

namespace nlwave {

/// sigma(xi) by adaptive cubature over the positive quadrant (the integrand
/// reduces to 1 - prod_i cos(xi_i alpha_i) by evenness).
inline double kernel_symbol(const kernel_spec& k, std::span<const double> xi, double tol = 1e-13) {
    const int d = k.dim;
    auto f = [&](const double* a) {
        double r2 = a[0] * a[0] + (d == 2 ? a[1] * a[1] : 0.0);
        // 1 - cos(x) loses digits for small x; use 2 sin^2(x/2) per factor
        double one_minus;
        if (d == 1) {
            double s = std::sin(0.5 * xi[0] * a[0]);
            one_minus = 2.0 * s * s;
        } else {
            double s0 = std::sin(0.5 * xi[0] * a[0]), s1 = std::sin(0.5 * xi[1] * a[1]);
            double c0 = std::cos(xi[0] * a[0]);
            one_minus = 2.0 * s0 * s0 + c0 * 2.0 * s1 * s1;
        }
        return one_minus * radial_profile(k, std::sqrt(r2));
    };
    quad::adaptive_options opt;
    opt.tol = tol / (1 << d);
    opt.order = 16;
    quad::box b{d, {0.0, 0.0}, {k.delta, d == 2 ? k.delta : 0.0}};
    return (1 << d) * quad::integrate(f, b, opt);
}

/// Memoised sigma keyed by (kernel, |xi_1|, |xi_2|) with the coordinates sorted
/// (sigma is even in each component and symmetric under their exchange).
class symbol_cache {
public:
    double get(const kernel_spec& k, double x0, double x1, double tol) {
        x0 = std::abs(x0);
        x1 = std::abs(x1);
        if (k.dim == 2 && x1 < x0) std::swap(x0, x1);
        auto key = std::make_tuple(stencil_key(k, 0.0, 0, tol), x0, x1);
        {
            std::lock_guard lock(mutex_);
            auto it = values_.find(key);
            if (it != values_.end()) return it->second;
        }
        double xi[2] = {x0, x1};
        double v = kernel_symbol(k, std::span<const double>(xi, k.dim), tol);
        std::lock_guard lock(mutex_);
        values_.emplace(key, v);
        return v;
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<std::uint64_t, double, double>, double> values_;
};

inline symbol_cache& global_symbol_cache() {
    static symbol_cache c;
    return c;
}

using field_fn = std::function<double(std::span<const double>)>;
using source_fn = std::function<double(std::span<const double>, double)>;

struct reference_options {
    double half_width = 4.0;     // W
    int modes = 512;             // per axis, even
    double symbol_tol = 1e-13;
    double edge_fraction = 0.1;  // outer band checked for wrap-around contamination
    double edge_tol = 1e-10;     // relative to the data peak
    int duhamel_nodes = 16;      // Gauss nodes per Duhamel panel
    int duhamel_panels = 64;
};

/// Modal representation at time T on the periodic box.
struct spectral_state {
    int dim = 1;
    int n = 0;
    double W = 0.0;
    std::vector<cplx> coef;    // FFT coefficients (forward transform / n^d)
    std::vector<double> sigma;
    std::vector<cplx> rate;    // time derivative of coef

    double wavenumber(int j) const {
        int jj = j <= n / 2 ? j : j - n;
        return std::numbers::pi * jj / W;
    }

    /// Trigonometric interpolant at x (the Nyquist mode enters as a cosine).
    double evaluate(std::span<const double> x) const {
        auto basis = [&](int j, double xc) {
            double arg = wavenumber(j) * (xc + W);
            return j == n / 2 ? cplx(std::cos(arg), 0.0) : std::polar(1.0, arg);
        };
        if (dim == 1) {
            cplx acc = 0.0;
            for (int j = 0; j < n; ++j) acc += coef[j] * basis(j, x[0]);
            return acc.real();
        }
        std::vector<cplx> e1(n);
        for (int j = 0; j < n; ++j) e1[j] = basis(j, x[1]);
        cplx acc = 0.0;
        for (int a = 0; a < n; ++a) {
            cplx row = 0.0;
            for (int b = 0; b < n; ++b) row += coef[static_cast<std::size_t>(a) * n + b] * e1[b];
            acc += basis(a, x[0]) * row;
        }
        return acc.real();
    }

    /// 0.5 sum (|rate|^2 + sigma |coef|^2), the modal energy per unit volume.
    double energy() const {
        double e = 0.0;
        for (std::size_t i = 0; i < coef.size(); ++i)
            e += std::norm(rate[i]) + sigma[i] * std::norm(coef[i]);
        return 0.5 * e;
    }
};

namespace detail {

inline void fft_forward(std::vector<cplx>& data, int dim, int n) {
    fftw_plan plan;
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = dim == 1 ? fftw_plan_dft_1d(n, ptr, ptr, FFTW_FORWARD, FFTW_ESTIMATE)
                        : fftw_plan_dft_2d(n, n, ptr, ptr, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
}

inline void fft_backward(std::vector<cplx>& data, int dim, int n) {
    fftw_plan plan;
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = dim == 1 ? fftw_plan_dft_1d(n, ptr, ptr, FFTW_BACKWARD, FFTW_ESTIMATE)
                        : fftw_plan_dft_2d(n, n, ptr, ptr, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
}

/// Sample g on the periodic grid x_j = -W + j (2W / n) and return its
/// normalised forward transform.
inline std::vector<cplx> modal_coefficients(const std::function<double(std::span<const double>)>& g,
                                            int dim, int n, double W) {
    const double dx = 2.0 * W / n;
    const std::size_t total = dim == 1 ? n : static_cast<std::size_t>(n) * n;
    std::vector<cplx> data(total);
    for (std::size_t i = 0; i < total; ++i) {
        double x[2] = {-W + (dim == 1 ? i : i / n) * dx, dim == 2 ? -W + (i % n) * dx : 0.0};
        data[i] = g(std::span<const double>(x, dim));
    }
    fft_forward(data, dim, n);
    for (auto& v : data) v /= static_cast<double>(total);
    return data;
}

inline double max_abs_on_band(const std::vector<cplx>& coef, int dim, int n, double W, double band) {
    std::vector<cplx> data = coef;
    fft_backward(data, dim, n);
    const double dx = 2.0 * W / n;
    double m = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        double x0 = -W + (dim == 1 ? i : i / n) * dx;
        double x1 = dim == 2 ? -W + (i % n) * dx : 0.0;
        double r = std::max(std::abs(x0), std::abs(x1));
        if (r >= W - band) m = std::max(m, std::abs(data[i].real()));
    }
    return m;
}

} // namespace detail

/// Modal state at time T: cos/sin propagators plus Duhamel quadrature for f.
inline spectral_state spectral_solution(const kernel_spec& k, const field_fn& phi, const field_fn& psi,
                                        const source_fn* f, double T, const reference_options& opt) {
    k.validate();
    if (opt.modes % 2) throw config_error("mode count must be even");
    const int d = k.dim, n = opt.modes;
    const double W = opt.half_width;
    spectral_state st{d, n, W, {}, {}, {}};
    auto c_phi = detail::modal_coefficients(phi, d, n, W);
    auto c_psi = detail::modal_coefficients(psi, d, n, W);

    // amplitude scale of the data, for the relative edge check
    double peak = 0.0;
    for (auto [c, scale] : {std::pair{&c_phi, 1.0}, std::pair{&c_psi, std::max(T, 1.0)}}) {
        std::vector<cplx> data = *c;
        detail::fft_backward(data, d, n);
        for (auto& v : data) peak = std::max(peak, scale * std::abs(v.real()));
    }

    const std::size_t total = c_phi.size();
    st.sigma.resize(total);
    for (std::size_t i = 0; i < total; ++i) {
        int a = d == 1 ? static_cast<int>(i) : static_cast<int>(i / n);
        int b = d == 1 ? 0 : static_cast<int>(i % n);
        double s = global_symbol_cache().get(k, st.wavenumber(a), d == 2 ? st.wavenumber(b) : 0.0,
                                             opt.symbol_tol);
        if (s < -1e-12) throw numerical_error("negative kernel symbol; kernel is not nonnegative");
        st.sigma[i] = std::max(s, 0.0);
    }

    st.coef.resize(total);
    st.rate.resize(total);
    for (std::size_t i = 0; i < total; ++i) {
        double w = std::sqrt(st.sigma[i]);
        double c = std::cos(w * T), s = std::sin(w * T);
        double sinc = w > 0.0 ? s / w : T;
        st.coef[i] = c_phi[i] * c + c_psi[i] * sinc;
        st.rate[i] = -c_phi[i] * w * s + c_psi[i] * c;
    }

    if (f) {
        // u(T) += int_0^T sin(w (T - t)) / w f_hat(t) dt, composite Gauss-Legendre
        const auto& rule = quad::gauss_legendre(opt.duhamel_nodes);
        const double panel = T / opt.duhamel_panels;
        for (int q = 0; q < opt.duhamel_panels; ++q) {
            for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
                double t = q * panel + 0.5 * panel * (1.0 + rule.nodes[g]);
                double wt = 0.5 * panel * rule.weights[g];
                auto ft = detail::modal_coefficients(
                    [&](std::span<const double> x) { return (*f)(x, t); }, d, n, W);
                for (std::size_t i = 0; i < total; ++i) {
                    double w = std::sqrt(st.sigma[i]);
                    double s = std::sin(w * (T - t)), c = std::cos(w * (T - t));
                    double sinc = w > 0.0 ? s / w : (T - t);
                    st.coef[i] += wt * sinc * ft[i];
                    st.rate[i] += wt * c * ft[i];
                }
            }
        }
    }

    const double band = opt.edge_fraction * 2.0 * W;
    double edge = std::max(detail::max_abs_on_band(st.coef, d, n, W, band),
                           detail::max_abs_on_band(c_phi, d, n, W, band));
    if (peak > 0.0 && edge > opt.edge_tol * peak)
        throw domain_too_small_error(detail::concat("reference box half-width ", W,
                                                    " too small: edge amplitude ", edge,
                                                    " vs peak ", peak));
    return st;
}

/// Reference field at time T sampled at the given points.
inline std::vector<double> pseudo_spectral_reference(const kernel_spec& k, const field_fn& phi,
                                                     const field_fn& psi, const source_fn* f, double T,
                                                     const std::vector<std::array<double, 2>>& points,
                                                     const reference_options& opt = {}) {
    spectral_state st = spectral_solution(k, phi, psi, f, T, opt);
    std::vector<double> out(points.size());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < static_cast<int>(points.size()); ++i)
        out[i] = st.evaluate(std::span<const double>(points[i].data(), k.dim));
    return out;
}

} // namespace nlwave
