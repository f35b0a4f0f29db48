#pragma once

#include <complex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlwave {

/// Root of every exception thrown by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad user input: malformed configuration, inconsistent grid, bad key.
class config_error : public error {
public:
    using error::error;
};

/// Failure of a numerical procedure (quadrature, iteration, blow-up, ...).
class numerical_error : public error {
public:
    using error::error;
};

/// Unreadable or inconsistent cache file.
class cache_error : public error {
public:
    using error::error;
};

class domain_error : public numerical_error {
public:
    using numerical_error::numerical_error;
};

class shape_error : public error {
public:
    using error::error;
};

class out_of_range_error : public error {
public:
    using error::error;
};

class quadrature_failure : public numerical_error {
public:
    quadrature_failure(const std::string& what, double achieved)
        : numerical_error(what), achieved_tolerance(achieved) {}
    double achieved_tolerance;
};

class instability_error : public numerical_error {
public:
    instability_error(const std::string& what, int step_index)
        : numerical_error(what), step(step_index) {}
    int step;
};

class aliasing_error : public numerical_error {
public:
    using numerical_error::numerical_error;
};

class near_spectrum_error : public numerical_error {
public:
    near_spectrum_error(const std::string& what, std::complex<double> s_value)
        : numerical_error(what), s(s_value) {}
    std::complex<double> s;
};

class iteration_failure : public numerical_error {
public:
    iteration_failure(const std::string& what, double norm_a, double norm_b)
        : numerical_error(what), final_norm_a(norm_a), final_norm_b(norm_b) {}
    double final_norm_a;
    double final_norm_b;
};

class degenerate_kernel_error : public numerical_error {
public:
    using numerical_error::numerical_error;
};

class ill_posed_layer_error : public numerical_error {
public:
    ill_posed_layer_error(const std::string& what, double cond)
        : numerical_error(what), condition(cond) {}
    double condition;
};

class table_exhausted_error : public numerical_error {
public:
    using numerical_error::numerical_error;
};

class oracle_invalid_error : public numerical_error {
public:
    using numerical_error::numerical_error;
};

class probe_inconclusive_error : public numerical_error {
public:
    probe_inconclusive_error(const std::string& what, std::vector<double> h_values,
                             std::vector<double> errors)
        : numerical_error(what), h(std::move(h_values)), err(std::move(errors)) {}
    std::vector<double> h;
    std::vector<double> err;
};

class domain_too_small_error : public numerical_error {
public:
    using numerical_error::numerical_error;
};

namespace detail {

template <class... Args>
std::string concat(Args&&... args) {
    std::ostringstream os;
    os.precision(17);
    (os << ... << args);
    return os.str();
}

} // namespace detail
} // namespace nlwave
