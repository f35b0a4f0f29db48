#pragma once

// Binary cache files (little-endian, 64-bit floats) and CSV export of stencils.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "nlwave/errors.hpp"
#include "nlwave/hash.hpp"
#include "nlwave/stencil.hpp"

namespace nlwave {

static_assert(std::endian::native == std::endian::little,
              "cache files are written in host order, which must be little-endian");

class binary_writer {
public:
    explicit binary_writer(const std::filesystem::path& path) : path_(path) {
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        tmp_ = path;
        tmp_ += ".tmp";
        out_.open(tmp_, std::ios::binary | std::ios::trunc);
        if (!out_) throw cache_error("cannot open " + tmp_.string() + " for writing");
    }

    template <class T>
    binary_writer& put(const T& v) {
        static_assert(std::is_trivially_copyable_v<T>);
        out_.write(reinterpret_cast<const char*>(&v), sizeof v);
        return *this;
    }
    binary_writer& put_bytes(const void* p, std::size_t n) {
        out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
        return *this;
    }
    binary_writer& put_doubles(std::span<const double> v) { return put_bytes(v.data(), v.size_bytes()); }

    /// Flush and atomically move the file into place.
    void commit() {
        out_.close();
        if (!out_) throw cache_error("failed writing " + tmp_.string());
        std::filesystem::rename(tmp_, path_);
    }

private:
    std::filesystem::path path_, tmp_;
    std::ofstream out_;
};

class binary_reader {
public:
    explicit binary_reader(const std::filesystem::path& path) : path_(path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw cache_error("cannot open cache file " + path.string());
        buf_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }

    template <class T>
    T get() {
        T v;
        get_bytes(&v, sizeof v);
        return v;
    }
    void get_bytes(void* p, std::size_t n) {
        if (pos_ + n > buf_.size())
            throw cache_error("cache file " + path_.string() + " is truncated");
        std::memcpy(p, buf_.data() + pos_, n);
        pos_ += n;
    }
    std::vector<double> get_doubles(std::size_t n) {
        std::vector<double> v(n);
        get_bytes(v.data(), n * sizeof(double));
        return v;
    }
    void expect_end() const {
        if (pos_ != buf_.size())
            throw cache_error("cache file " + path_.string() + " has trailing bytes");
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::vector<char> buf_;
    std::size_t pos_ = 0;
};

inline void expect_magic(binary_reader& r, const char (&magic)[9], std::uint32_t version) {
    char got[8];
    r.get_bytes(got, 8);
    if (std::memcmp(got, magic, 8) != 0)
        throw cache_error("cache file " + r.path().string() + " has a bad magic number");
    auto v = r.get<std::uint32_t>();
    if (v != version)
        throw cache_error(detail::concat("cache file ", r.path().string(), " has version ", v,
                                         ", expected ", version));
}

/// Key of a stencil build: everything that determines the table.
inline std::uint64_t stencil_key(const kernel_spec& k, double h, int p, double quad_tol) {
    content_hash hsh;
    hsh.add(to_string(k.family)).add(k.delta).add(k.dim).add(k.nu).add(k.amplitude).add(k.rate)
        .add(h).add(p).add(quad_tol);
    for (const auto& [r, v] : k.profile) hsh.add(r).add(v);
    return hsh.value();
}

inline constexpr char stencil_magic[9] = "NLWSTEN1";

inline std::filesystem::path stencil_cache_path(const std::filesystem::path& dir, const kernel_spec& k,
                                                double h, int p, double quad_tol) {
    return dir / ("stencil_" + hex(stencil_key(k, h, p, quad_tol)) + ".bin");
}

inline void save_stencil(const stencil& st, const std::filesystem::path& path) {
    binary_writer w(path);
    w.put_bytes(stencil_magic, 8).put<std::uint32_t>(1);
    w.put<std::uint64_t>(stencil_key(st.kernel, st.h, st.p, st.quad_tol));
    w.put<std::int32_t>(st.dim).put<std::int32_t>(st.L).put<std::int32_t>(st.p);
    w.put<double>(st.h).put<double>(st.quad_tol);
    w.put<std::uint64_t>(st.a.size()).put_doubles(st.a);
    w.commit();
}

/// Load a cached stencil; the stored key must match the requested build.
inline stencil load_stencil(const std::filesystem::path& path, const kernel_spec& k, double h, int p,
                            double quad_tol) {
    binary_reader r(path);
    expect_magic(r, stencil_magic, 1);
    if (r.get<std::uint64_t>() != stencil_key(k, h, p, quad_tol))
        throw cache_error("stencil cache " + path.string() + " was built for different parameters");
    stencil st;
    st.dim = r.get<std::int32_t>();
    st.L = r.get<std::int32_t>();
    st.p = r.get<std::int32_t>();
    st.h = r.get<double>();
    st.quad_tol = r.get<double>();
    st.kernel = k;
    auto n = r.get<std::uint64_t>();
    if (n != static_cast<std::uint64_t>(st.size()))
        throw cache_error("stencil cache " + path.string() + " has an inconsistent table size");
    st.a = r.get_doubles(n);
    r.expect_end();
    for (int i = 0; i < st.size(); ++i) {
        multi_index m = st.offset(i);
        if (st.a[i] != st.a_at(-m) || !std::isfinite(st.a[i]))
            throw cache_error("stencil cache " + path.string() + " violates a_m = a_{-m}");
    }
    st.derive();
    return st;
}

/// Build or fetch from `dir`. Returns the stencil and whether it was a cache hit.
inline std::pair<stencil, bool> cached_stencil(const std::filesystem::path& dir, const kernel_spec& k,
                                               const grid_spec& g, int p, double quad_tol) {
    auto path = stencil_cache_path(dir, k, g.h, p, quad_tol);
    if (std::filesystem::exists(path)) return {load_stencil(path, k, g.h, p, quad_tol), true};
    stencil st = build_stencil(k, g, p, quad_tol);
    save_stencil(st, path);
    return {std::move(st), false};
}

inline void write_stencil_csv(const stencil& st, std::ostream& os) {
    os << (st.dim == 1 ? "m1,a,c\n" : "m1,m2,a,c\n");
    char buf[128];
    for (int i = 0; i < st.size(); ++i) {
        multi_index m = st.offset(i);
        if (st.dim == 1)
            std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", m[0], st.a[i], st.c[i]);
        else
            std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g\n", m[0], m[1], st.a[i], st.c[i]);
        os << buf;
    }
}

} // namespace nlwave
