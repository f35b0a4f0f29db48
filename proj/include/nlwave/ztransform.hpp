#pragma once

// Contour machinery for the inverse z-transform on |z| = rho:
//   K^(j) = (rho^j / P) sum_{p=1}^{P} K(z_p) e^{2 pi i j p / P},  z_p = rho e^{2 pi i p / P}.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "nlwave/errors.hpp"

namespace nlwave {

using cplx = std::complex<double>;

struct contour_spec {
    double rho = 1.0;
    int P = 0;

    /// Default radius from rho^P = theta. P is rounded up to an even count and
    /// never below 2N.
    static contour_spec make(int N, int P = 0, double theta = 1e8) {
        if (N < 0) throw config_error("step count must be non-negative");
        if (P <= 0) P = std::max(2 * N, 16);
        if (P < 2 * N)
            throw config_error(detail::concat("contour node count P = ", P, " is below 2N = ", 2 * N));
        if (P % 2) ++P;
        if (!(theta > 1.0)) throw config_error("contour theta must exceed 1");
        return {std::pow(theta, 1.0 / P), P};
    }

    void validate(int N) const {
        if (!(rho > 1.0)) throw config_error("contour radius must exceed 1");
        if (P < 2 * N)
            throw config_error(detail::concat("contour node count P = ", P, " is below 2N = ", 2 * N));
    }

    cplx node(int p) const { return std::polar(rho, 2.0 * std::numbers::pi * p / P); }
};

/// s = (z^{-1} - 2 + z) / tau^2
inline cplx s_of_z(cplx z, double tau) {
    if (z == cplx(0.0, 0.0)) throw domain_error("s(z) is undefined at z = 0");
    return (1.0 / z - 2.0 + z) / (tau * tau);
}

inline constexpr double residue_threshold = 1e-8;

/// Direct P-point trapezoidal sum for one j. `samples[p]` holds K(z_p) for
/// p = 1..P at index p-1.
inline double inverse_ztransform(std::span<const cplx> samples, int j, const contour_spec& c) {
    if (static_cast<int>(samples.size()) != c.P) throw shape_error("sample count differs from P");
    if (j < 0 || j >= c.P) throw out_of_range_error(detail::concat("step index ", j, " outside [0, P)"));
    cplx acc = 0.0;
    for (int p = 1; p <= c.P; ++p) {
        // reduce jp mod P before forming the angle to keep it exact
        long long ph = (static_cast<long long>(j) * p) % c.P;
        acc += samples[p - 1] * std::polar(1.0, 2.0 * std::numbers::pi * ph / c.P);
    }
    acc *= std::pow(c.rho, j) / c.P;
    if (std::abs(acc.imag()) > residue_threshold * (1.0 + std::abs(acc.real())))
        throw aliasing_error(detail::concat("inverse z-transform residue ", acc.imag(),
                                            " at j = ", j, " exceeds threshold"));
    return acc.real();
}

/// Matrix-valued direct sum; samples[p-1] is a row-major block of `entries` values.
inline std::vector<double> inverse_ztransform(std::span<const std::vector<cplx>> samples, int j,
                                              const contour_spec& c) {
    if (static_cast<int>(samples.size()) != c.P) throw shape_error("sample count differs from P");
    const std::size_t entries = samples.empty() ? 0 : samples[0].size();
    std::vector<double> out(entries);
    std::vector<cplx> column(c.P);
    for (std::size_t e = 0; e < entries; ++e) {
        for (int p = 0; p < c.P; ++p) column[p] = samples[p][e];
        out[e] = inverse_ztransform(column, j, c);
    }
    return out;
}

namespace detail {
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
} // namespace detail

/// All-j inverse transform for samples with K(conj z) = conj K(z).
///
/// `half[e * (P/2 + 1) + p]` holds entry e at node z_p, p = 0..P/2 (z_0 = rho).
/// Those samples determine the full contour, so the sum is a Hermitian
/// (complex-to-real) backward DFT. The two real-axis samples must be real; a
/// residue there means the sampled map breaks the conjugate symmetry.
/// Returns out[j * entries + e] for j = 0..jmax.
inline std::vector<double> inverse_ztransform_hermitian(std::span<const cplx> half, std::size_t entries,
                                                        int jmax, const contour_spec& c) {
    const int P = c.P;
    const int nh = P / 2 + 1;
    if (P % 2) throw config_error("Hermitian inverse transform needs an even node count");
    if (half.size() != entries * nh) throw shape_error("half-contour sample block has the wrong size");
    if (jmax >= P) throw out_of_range_error("requested steps exceed the contour resolution");

    double scale_max = 0.0;
    for (const cplx& v : half) scale_max = std::max(scale_max, std::abs(v));
    for (std::size_t e = 0; e < entries; ++e) {
        for (int p : {0, P / 2}) {
            cplx v = half[e * nh + p];
            if (std::abs(v.imag()) > residue_threshold * (1.0 + scale_max))
                throw aliasing_error(detail::concat("imaginary residue ", v.imag(),
                                                    " on the real axis of the contour (node ", p, ")"));
        }
    }

    std::vector<double> out(static_cast<std::size_t>(jmax + 1) * entries);
    const std::size_t chunk = std::max<std::size_t>(1, std::min<std::size_t>(entries, 4096));
    std::vector<cplx> in(chunk * nh);
    std::vector<double> res(chunk * P);
    std::vector<double> rho_pow(jmax + 1);
    for (int j = 0; j <= jmax; ++j) rho_pow[j] = std::pow(c.rho, j) / P;

    for (std::size_t e0 = 0; e0 < entries; e0 += chunk) {
        const int howmany = static_cast<int>(std::min(chunk, entries - e0));
        std::copy(half.begin() + e0 * nh, half.begin() + (e0 + howmany) * nh, in.begin());
        for (int k = 0; k < howmany; ++k) {
            in[k * nh].imag(0.0);
            in[k * nh + P / 2].imag(0.0);
        }
        fftw_plan plan;
        {
            std::lock_guard lock(detail::fftw_planner_mutex());
            plan = fftw_plan_many_dft_c2r(1, &P, howmany, reinterpret_cast<fftw_complex*>(in.data()),
                                          nullptr, 1, nh, res.data(), nullptr, 1, P, FFTW_ESTIMATE);
        }
        fftw_execute(plan);
        {
            std::lock_guard lock(detail::fftw_planner_mutex());
            fftw_destroy_plan(plan);
        }
        for (int k = 0; k < howmany; ++k)
            for (int j = 0; j <= jmax; ++j)
                out[static_cast<std::size_t>(j) * entries + e0 + k] = rho_pow[j] * res[k * P + j];
    }
    return out;
}

} // namespace nlwave
