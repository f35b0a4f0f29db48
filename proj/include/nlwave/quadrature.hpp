#pragma once

// Gauss-Legendre rules and a globally adaptive tensor-product cubature over
// 1D/2D boxes. The integrand may be vector valued (several basis functions
// against the same weight), which is how the stencil builder uses it.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>
#include <vector>

#include "nlwave/errors.hpp"

namespace nlwave::quad {

struct gauss_rule {
    std::vector<double> nodes;   // on [-1, 1]
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule, computed once per n by Newton iteration on P_n.
inline const gauss_rule& gauss_legendre(int n) {
    static std::mutex guard;
    static std::map<int, gauss_rule> rules;
    std::lock_guard lock(guard);
    if (auto it = rules.find(n); it != rules.end()) return it->second;

    gauss_rule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            if (n == 1) { p1 = x; p0 = 1.0; }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) r.nodes[n / 2] = 0.0;
    return rules.emplace(n, std::move(r)).first->second;
}

/// Axis-aligned box in 1 or 2 dimensions (second axis ignored when dim == 1).
struct box {
    int dim = 1;
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{0.0, 0.0};

    double width(int axis) const { return hi[axis] - lo[axis]; }

    std::vector<box> split() const {
        std::vector<box> out;
        if (dim == 1) {
            double mid = 0.5 * (lo[0] + hi[0]);
            out.push_back({1, {lo[0], 0.0}, {mid, 0.0}});
            out.push_back({1, {mid, 0.0}, {hi[0], 0.0}});
            return out;
        }
        double mx = 0.5 * (lo[0] + hi[0]);
        double my = 0.5 * (lo[1] + hi[1]);
        out.push_back({2, {lo[0], lo[1]}, {mx, my}});
        out.push_back({2, {mx, lo[1]}, {hi[0], my}});
        out.push_back({2, {lo[0], my}, {mx, hi[1]}});
        out.push_back({2, {mx, my}, {hi[0], hi[1]}});
        return out;
    }
};

/// Tensor Gauss rule on a box. `f(const double* s, double* out)` writes
/// `ncomp` integrand values at point s; results are accumulated into `acc`.
template <class F>
void gauss_box(const F& f, const box& b, const gauss_rule& rule, int ncomp, double* acc) {
    const int n = static_cast<int>(rule.nodes.size());
    std::vector<double> vals(ncomp);
    const double cx = 0.5 * (b.lo[0] + b.hi[0]), hx = 0.5 * b.width(0);
    if (b.dim == 1) {
        for (int i = 0; i < n; ++i) {
            double s[2] = {cx + hx * rule.nodes[i], 0.0};
            f(s, vals.data());
            double w = hx * rule.weights[i];
            for (int c = 0; c < ncomp; ++c) acc[c] += w * vals[c];
        }
        return;
    }
    const double cy = 0.5 * (b.lo[1] + b.hi[1]), hy = 0.5 * b.width(1);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double s[2] = {cx + hx * rule.nodes[i], cy + hy * rule.nodes[j]};
            f(s, vals.data());
            double w = hx * hy * rule.weights[i] * rule.weights[j];
            for (int c = 0; c < ncomp; ++c) acc[c] += w * vals[c];
        }
    }
}

struct adaptive_options {
    int order = 10;
    double tol = 1e-12;          // absolute, on the max component
    int max_regions = 200000;
};

struct adaptive_result {
    std::vector<double> value;
    double error_estimate = 0.0;
    int regions = 0;
};

/// Globally adaptive cubature. Each region carries the difference between its
/// one-box Gauss estimate and the sum over its 2^d children; the region with
/// the largest difference is split until the summed estimate drops below tol.
/// Integrable endpoint/corner singularities are resolved by repeated dyadic
/// splitting of the region touching them.
template <class F>
adaptive_result integrate_adaptive(const F& f, const box& root, int ncomp,
                                   const adaptive_options& opt = {}) {
    const gauss_rule& rule = gauss_legendre(opt.order);

    struct region {
        box b;
        std::vector<double> value;                 // sum over the children
        double err;
        std::vector<std::vector<double>> children; // per-child Gauss estimates
    };
    auto evaluate = [&](const box& b, const std::vector<double>* coarse) {
        std::vector<double> parent(ncomp, 0.0);
        if (coarse) {
            parent = *coarse;
        } else {
            gauss_box(f, b, rule, ncomp, parent.data());
        }
        region r{b, std::vector<double>(ncomp, 0.0), 0.0, {}};
        for (const box& child : b.split()) {
            std::vector<double> v(ncomp, 0.0);
            gauss_box(f, child, rule, ncomp, v.data());
            for (int c = 0; c < ncomp; ++c) r.value[c] += v[c];
            r.children.push_back(std::move(v));
        }
        for (int c = 0; c < ncomp; ++c) r.err = std::max(r.err, std::abs(r.value[c] - parent[c]));
        return r;
    };

    auto cmp = [](const region& a, const region& b) { return a.err < b.err; };
    std::priority_queue<region, std::vector<region>, decltype(cmp)> heap(cmp);
    heap.push(evaluate(root, nullptr));
    double total_err = heap.top().err;
    int regions = 1;

    auto magnitude = [&]() {
        // cheap scale for the roundoff floor: largest component of the root estimate
        double m = 0.0;
        for (double v : heap.top().value) m = std::max(m, std::abs(v));
        return m;
    };
    const double scale = magnitude();

    while (total_err > std::max(opt.tol, 64.0 * 2.2e-16 * scale)) {
        if (regions >= opt.max_regions) {
            const region& worst = heap.top();
            throw quadrature_failure(
                detail::concat("adaptive quadrature did not converge; worst cell [", worst.b.lo[0],
                               ",", worst.b.hi[0], "]x[", worst.b.lo[1], ",", worst.b.hi[1],
                               "], achieved ", total_err, " vs tol ", opt.tol),
                total_err);
        }
        region worst = heap.top();
        heap.pop();
        total_err -= worst.err;
        std::vector<box> kids = worst.b.split();
        for (std::size_t i = 0; i < kids.size(); ++i) {
            region r = evaluate(kids[i], &worst.children[i]);
            total_err += r.err;
            heap.push(std::move(r));
            ++regions;
        }
        if (total_err < 0.0) total_err = 0.0;
    }

    adaptive_result out;
    out.value.assign(ncomp, 0.0);
    out.regions = regions;
    out.error_estimate = total_err;
    // deterministic summation: sort regions by position before accumulating
    std::vector<region> all;
    while (!heap.empty()) {
        all.push_back(heap.top());
        heap.pop();
    }
    std::sort(all.begin(), all.end(), [](const region& a, const region& b) {
        return a.b.lo[0] != b.b.lo[0] ? a.b.lo[0] < b.b.lo[0]
             : a.b.lo[1] != b.b.lo[1] ? a.b.lo[1] < b.b.lo[1]
                                      : a.b.hi[0] < b.b.hi[0];
    });
    for (const region& r : all)
        for (int c = 0; c < ncomp; ++c) out.value[c] += r.value[c];
    return out;
}

/// Scalar convenience wrapper.
template <class F>
double integrate(const F& f, const box& b, const adaptive_options& opt = {}) {
    auto wrapped = [&](const double* s, double* out) { out[0] = f(s); };
    return integrate_adaptive(wrapped, b, 1, opt).value[0];
}

} // namespace nlwave::quad
