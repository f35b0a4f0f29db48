#pragma once

// z-domain Dirichlet-to-Dirichlet maps for the 1D exterior problem.
//
// Group the exterior nodes right of the domain in blocks of L, U_0 being the
// inner boundary layer and U_1 the ghost layer. The exterior equations read
//   A U_{q-1} + (s I + B) U_q + A^T U_{q+1} = 0,  q >= 1,
// and the decaying solution is U_q = K^q U_0 for the one-block transfer map K.

#include <Eigen/Dense>

#include <cmath>
#include <complex>

#include "nlwave/errors.hpp"
#include "nlwave/stencil.hpp"
#include "nlwave/ztransform.hpp"

namespace nlwave {

using cmatrix = Eigen::MatrixXcd;

struct toeplitz_pair {
    Eigen::MatrixXd A;   // upper triangular, A(i,j) = c_{L+i-j} for j >= i
    Eigen::MatrixXd B;   // symmetric, B(i,j) = c_{|i-j|}
};

inline toeplitz_pair assemble_toeplitz(const stencil& st) {
    if (st.dim != 1) throw config_error("Toeplitz blocks are defined for d = 1 only");
    const int L = st.L;
    toeplitz_pair tp{Eigen::MatrixXd::Zero(L, L), Eigen::MatrixXd::Zero(L, L)};
    for (int i = 0; i < L; ++i) {
        for (int j = 0; j < L; ++j) {
            if (j >= i) tp.A(i, j) = st.c_at({L + i - j, 0});
            tp.B(i, j) = st.c_at({std::abs(i - j), 0});
        }
    }
    return tp;
}

/// Closed-form map for L = 1: the root of c0 k^2 - 2 (c0 + s) k + c0 = 0 of
/// modulus below one.
inline cplx kcaret_scalar(cplx s, double c0) {
    if (c0 == 0.0) throw degenerate_kernel_error("scalar DtD map needs c0 != 0");
    cplx root = std::sqrt(2.0 * c0 * s + s * s);
    cplx k1 = (c0 + s - root) / c0;
    cplx k2 = (c0 + s + root) / c0;
    return std::abs(k1) <= std::abs(k2) ? k1 : k2;
}

struct dtd_map_1d {
    cmatrix right;   // inner layer (ascending x) -> ghost layer (ascending x), right end
    cmatrix left;    // same for the left end, J right J
    int iterations = 0;
    double final_norm_a = 0.0;
    double final_norm_b = 0.0;
};

inline double spectral_norm(const cmatrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<cmatrix> svd(m);
    return svd.singularValues()(0);
}

inline cmatrix exchange_conjugate(const cmatrix& m) {
    return m.colwise().reverse().rowwise().reverse();
}

/// Doubling (cyclic reduction) iteration. With A_0 = -(sI+B)^{-1}A,
/// B_0 = -(sI+B)^{-1}A^T, every level satisfies U_{2^m} = A_m U_0 + B_m U_{2^{m+1}},
/// so U_1 = (A_0 + B_0 A_1 + B_0 B_1 A_2 + ...) U_0. The expansion is
/// accumulated level by level with the running product B_0 ... B_{m-1}.
inline dtd_map_1d kcaret_iterative(const toeplitz_pair& tp, cplx s, double eps_iter = 1e-14,
                                   int max_iter = 20) {
    const int L = static_cast<int>(tp.A.rows());
    const cmatrix I = cmatrix::Identity(L, L);
    const cmatrix A = tp.A.cast<cplx>();
    const cmatrix At = tp.A.transpose().cast<cplx>();
    cmatrix sB = s * I + tp.B.cast<cplx>();

    Eigen::PartialPivLU<cmatrix> lu(sB);
    if (!(lu.rcond() > 1e-14))
        throw near_spectrum_error("sI + B is numerically singular", s);
    cmatrix Am = -lu.solve(A);
    cmatrix Bm = -lu.solve(At);

    dtd_map_1d out;
    cmatrix K = Am;
    cmatrix prod = Bm;
    double na = spectral_norm(Am), nb = spectral_norm(Bm);
    int it = 0;
    while (!(na < eps_iter && nb < eps_iter)) {
        if (it >= max_iter)
            throw iteration_failure(detail::concat("DtD doubling iteration did not converge in ",
                                                   max_iter, " steps at s = ", s),
                                    na, nb);
        cmatrix D = I - Am * Bm - Bm * Am;
        Eigen::PartialPivLU<cmatrix> dlu(D);
        if (!(dlu.rcond() > 1e-14))
            throw near_spectrum_error("doubling step matrix is numerically singular", s);
        cmatrix An = dlu.solve(Am * Am);
        cmatrix Bn = dlu.solve(Bm * Bm);
        Am = std::move(An);
        Bm = std::move(Bn);
        K += prod * Am;
        prod = prod * Bm;
        na = spectral_norm(Am);
        nb = spectral_norm(Bm);
        ++it;
    }
    out.right = std::move(K);
    out.left = exchange_conjugate(out.right);
    out.iterations = it;
    out.final_norm_a = na;
    out.final_norm_b = nb;
    return out;
}

/// ||A + (sI + B) K + A^T K^2||_2
inline double fixed_point_residual(const toeplitz_pair& tp, cplx s, const cmatrix& K) {
    const int L = static_cast<int>(tp.A.rows());
    cmatrix r = tp.A.cast<cplx>() + (s * cmatrix::Identity(L, L) + tp.B.cast<cplx>()) * K +
                tp.A.transpose().cast<cplx>() * K * K;
    return spectral_norm(r);
}

} // namespace nlwave
