#pragma once

// Leapfrog time integration on the truncated lattice
//   u^(n+1) = 2 u^(n) - u^(n-1) + tau^2 (f^(n) - L_{delta,h} u^(n))  on K,
// with the ghost layer K+_gamma (or Neumann data on K-_gamma) supplied by a
// boundary provider before each update.

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "nlwave/errors.hpp"
#include "nlwave/lattice.hpp"
#include "nlwave/stencil.hpp"

namespace nlwave {

struct time_grid {
    double tau = 0.0;
    int N = 0;

    double T() const { return tau * N; }

    static time_grid from_final_time(double T, double tau) {
        if (!(tau > 0.0)) throw config_error("time step tau must be positive");
        if (!(T >= 0.0)) throw config_error("final time must be non-negative");
        return {tau, exact_ratio(T, tau, "final time T / tau")};
    }
};

/// Index bookkeeping for the lattice K u K+_gamma, stored as the cube |k|_inf < M + L.
struct scheme_layout {
    int dim = 1;
    int M = 0;
    int L = 0;
    box_lattice lattice;
    std::vector<int> interior;   // K, lexicographic
    std::vector<int> core;       // K-
    std::vector<int> inner;      // K-_gamma, canonical enumeration
    std::vector<int> ghost;      // K+_gamma, canonical enumeration

    static scheme_layout make(int dim, int M, int L) {
        if (M <= L) throw config_error("the domain must contain one full boundary layer (M > L)");
        scheme_layout s;
        s.dim = dim;
        s.M = M;
        s.L = L;
        s.lattice = box_lattice{dim, M + L};
        auto fill = [&](region r, std::vector<int>& out) {
            for (const multi_index& k : enumerate(r, M, L, dim)) out.push_back(s.lattice.index(k));
        };
        fill(region::interior, s.interior);
        fill(region::inner_core, s.core);
        fill(region::inner_layer, s.inner);
        fill(region::ghost_layer, s.ghost);
        return s;
    }

    bool in_interior(const multi_index& k) const { return inf_norm(k, dim) < M; }
};

/// Inner-layer values for steps 0..n, one contiguous block per step.
struct inner_history {
    int width = 0;
    std::vector<double> data;

    int steps() const { return width == 0 ? 0 : static_cast<int>(data.size() / width); }
    std::span<const double> at(int j) const {
        return {data.data() + static_cast<std::size_t>(j) * width, static_cast<std::size_t>(width)};
    }
    void push(std::span<const double> v) { data.insert(data.end(), v.begin(), v.end()); }
};

struct wave_state {
    int n = 0;
    lattice_field prev;
    lattice_field curr;
    inner_history history;
    bool record_history = true;
};

enum class bc_kind { ghost_values, neumann };

/// Pull interface: the stepper asks for level-n boundary data before forming u^(n+1).
class boundary_provider {
public:
    virtual ~boundary_provider() = default;
    /// ghost_values: fill the ghost layer and use the c-form everywhere;
    /// neumann: fill the ghost layer, turn it into Neumann data on K-_gamma and
    /// use the interior-only operator there.
    virtual bc_kind kind() const { return bc_kind::ghost_values; }
    /// Ghost-layer values at level n from the inner-layer history 0..n.
    virtual void ghost_values(int n, const inner_history& history, std::span<double> out) = 0;
    /// Additive perturbation of the Neumann data (neumann kind only).
    virtual void neumann_perturbation(int /*n*/, std::span<double> /*data*/) {}
    /// Whether the provider reads the history (otherwise it need not be stored).
    virtual bool needs_history() const { return true; }
};

class zero_boundary final : public boundary_provider {
public:
    void ghost_values(int, const inner_history&, std::span<double> out) override {
        std::fill(out.begin(), out.end(), 0.0);
    }
    bool needs_history() const override { return false; }
};

/// Precomputed operator application on a layout.
struct operator_plan {
    struct term {
        int stride;
        double coef;
    };
    std::vector<term> c_form;                  // all nonzero c_m
    std::vector<std::vector<term>> inner_near;  // per inner node: a_m to interior neighbours
    std::vector<std::vector<term>> inner_far;   // per inner node: a_m to ghost neighbours
    double h_pow_d = 1.0;

    static operator_plan make(const stencil& st, const scheme_layout& lay) {
        if (st.dim != lay.dim || st.L != lay.L) throw shape_error("stencil does not fit the layout");
        operator_plan p;
        p.h_pow_d = std::pow(st.h, st.dim);
        for (int i = 0; i < st.size(); ++i) {
            multi_index m = st.offset(i);
            bool centre = m[0] == 0 && m[1] == 0;
            if (st.c[i] != 0.0 || centre) p.c_form.push_back({lay.lattice.stride_of(m), st.c[i]});
        }
        p.inner_near.resize(lay.inner.size());
        p.inner_far.resize(lay.inner.size());
        for (std::size_t q = 0; q < lay.inner.size(); ++q) {
            multi_index k = lay.lattice.at(lay.inner[q]);
            for (int i = 0; i < st.size(); ++i) {
                multi_index m = st.offset(i);
                if ((m[0] == 0 && m[1] == 0) || st.a[i] == 0.0) continue;
                term t{lay.lattice.stride_of(m), st.a[i]};
                (lay.in_interior(k + m) ? p.inner_near : p.inner_far)[q].push_back(t);
            }
        }
        return p;
    }
};

/// (N u)_k = -h^d sum_{m in K+_gamma} a_{k-m} (u_k - u_m), k in K-_gamma.
/// `u` holds values over the layout's cube (interior and ghost layer).
inline std::vector<double> neumann_operator(const operator_plan& plan, const scheme_layout& lay,
                                            std::span<const double> u) {
    if (u.size() != static_cast<std::size_t>(lay.lattice.size()))
        throw out_of_range_error("field does not cover the ghost layer");
    std::vector<double> out(lay.inner.size());
    for (std::size_t q = 0; q < lay.inner.size(); ++q) {
        const int k = lay.inner[q];
        double acc = 0.0;
        for (const auto& t : plan.inner_far[q]) acc += t.coef * (u[k] - u[k + t.stride]);
        out[q] = -plan.h_pow_d * acc;
    }
    return out;
}

/// L_{delta,h} u on K. In neumann mode the inner layer uses the interior-only
/// a-form minus h^{-d} times the supplied Neumann data.
inline void apply_scheme_operator(const operator_plan& plan, const scheme_layout& lay,
                                  std::span<const double> u, std::span<double> Lu,
                                  const std::vector<double>* neumann = nullptr) {
    const int n = static_cast<int>(lay.interior.size());
#pragma omp parallel for schedule(static)
    for (int q = 0; q < n; ++q) {
        const int k = lay.interior[q];
        double acc = 0.0;
        for (const auto& t : plan.c_form) acc += t.coef * u[k + t.stride];
        Lu[k] = acc;
    }
    if (!neumann) return;
    const double inv = 1.0 / plan.h_pow_d;
    for (std::size_t q = 0; q < lay.inner.size(); ++q) {
        const int k = lay.inner[q];
        double acc = 0.0;
        for (const auto& t : plan.inner_near[q]) acc += t.coef * (u[k] - u[k + t.stride]);
        Lu[k] = acc - inv * (*neumann)[q];
    }
}

/// u^(0) = phi, u^(1) = phi + tau psi + tau^2/2 (f0 - L phi).
///
/// Data must vanish outside K-. Values there below `support_tol` times the
/// data maximum are treated as zero (sampled Gaussian tails); anything larger
/// is a configuration error.
inline wave_state initial_steps(const lattice_field& phi, const lattice_field& psi,
                                const lattice_field* f0, const stencil& st, const scheme_layout& lay,
                                double tau, double support_tol = 1e-14) {
    auto clean = [&](const lattice_field& in, const char* name) {
        if (in.lattice.dim != lay.dim || in.lattice.R != lay.lattice.R)
            throw shape_error(detail::concat(name, " is not defined on the scheme lattice"));
        lattice_field out = in;
        double peak = 0.0;
        for (double v : in.values) peak = std::max(peak, std::abs(v));
        for (int i = 0; i < lay.lattice.size(); ++i) {
            multi_index k = lay.lattice.at(i);
            if (inf_norm(k, lay.dim) < lay.M - lay.L) continue;
            if (std::abs(out.values[i]) > support_tol * peak)
                throw config_error(detail::concat(name, " is not supported inside K- (value ",
                                                  out.values[i], " at node (", k[0], ",", k[1], "))"));
            out.values[i] = 0.0;
        }
        return out;
    };
    wave_state s;
    s.prev = clean(phi, "initial displacement");
    lattice_field v = clean(psi, "initial velocity");
    lattice_field f;
    if (f0) f = clean(*f0, "source");

    operator_plan plan = operator_plan::make(st, lay);
    std::vector<double> Lphi(lay.lattice.size(), 0.0);
    apply_scheme_operator(plan, lay, s.prev.values, Lphi);
    s.curr = lattice_field(lay.lattice);
    for (int k : lay.interior)
        s.curr.values[k] = s.prev.values[k] + tau * v.values[k] +
                           0.5 * tau * tau * ((f0 ? f.values[k] : 0.0) - Lphi[k]);
    s.n = 1;
    s.history.width = static_cast<int>(lay.inner.size());
    std::vector<double> buf(lay.inner.size());
    for (const lattice_field* level : {&s.prev, &s.curr}) {
        for (std::size_t q = 0; q < lay.inner.size(); ++q) buf[q] = level->values[lay.inner[q]];
        s.history.push(buf);
    }
    return s;
}

/// One leapfrog step from level n to n+1.
class leapfrog {
public:
    leapfrog(const stencil& st, scheme_layout layout, double tau)
        : layout_(std::move(layout)), plan_(operator_plan::make(st, layout_)), tau_(tau),
          Lu_(layout_.lattice.size(), 0.0), ghost_(layout_.ghost.size()), inner_(layout_.inner.size()) {}

    const scheme_layout& layout() const { return layout_; }
    const operator_plan& plan() const { return plan_; }
    double tau() const { return tau_; }

    /// Advance the state; `f` is the level-n source (nullptr for zero).
    void step(wave_state& s, boundary_provider& bc, const lattice_field* f = nullptr) {
        if (s.record_history && s.history.steps() != s.n + 1)
            throw shape_error("history length must equal n + 1");
        auto& u = s.curr.values;
        bc.ghost_values(s.n, s.history, ghost_);
        for (std::size_t q = 0; q < layout_.ghost.size(); ++q) u[layout_.ghost[q]] = ghost_[q];

        if (bc.kind() == bc_kind::neumann) {
            std::vector<double> data = neumann_operator(plan_, layout_, u);
            bc.neumann_perturbation(s.n, data);
            apply_scheme_operator(plan_, layout_, u, Lu_, &data);
        } else {
            apply_scheme_operator(plan_, layout_, u, Lu_);
        }

        auto& prev = s.prev.values;
        const double t2 = tau_ * tau_;
        bool finite = true;
        for (int k : layout_.interior) {
            double next = 2.0 * u[k] - prev[k] + t2 * ((f ? f->values[k] : 0.0) - Lu_[k]);
            finite = finite && std::isfinite(next);
            prev[k] = next;
        }
        // the ghost layer of the new level is filled on the next call
        for (int k : layout_.ghost) prev[k] = 0.0;
        std::swap(s.prev, s.curr);
        ++s.n;
        if (!finite)
            throw instability_error(detail::concat("non-finite value after step ", s.n), s.n);
        if (s.record_history) {
            for (std::size_t q = 0; q < layout_.inner.size(); ++q) inner_[q] = s.curr.values[layout_.inner[q]];
            s.history.push(inner_);
        }
    }

private:
    scheme_layout layout_;
    operator_plan plan_;
    double tau_;
    std::vector<double> Lu_;
    std::vector<double> ghost_;
    std::vector<double> inner_;
};

/// 2 / sqrt(S); +inf for a zero coefficient table.
inline double cfl_bound(const stencil& st) {
    if (st.S == 0.0) return std::numeric_limits<double>::infinity();
    return 2.0 / std::sqrt(st.S);
}

} // namespace nlwave
