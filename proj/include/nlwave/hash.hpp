#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <span>
#include <string>
#include <string_view>

namespace nlwave {

/// FNV-1a 64-bit content hash, used for cache keys and run manifests.
class content_hash {
public:
    content_hash& bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            state_ ^= p[i];
            state_ *= 0x100000001b3ULL;
        }
        return *this;
    }
    content_hash& add(std::string_view s) {
        bytes(s.data(), s.size());
        return bytes("\0", 1);
    }
    content_hash& add(double v) { return bytes(&v, sizeof v); }
    content_hash& add(std::int64_t v) { return bytes(&v, sizeof v); }
    content_hash& add(int v) { return add(static_cast<std::int64_t>(v)); }
    content_hash& add(std::span<const double> v) { return bytes(v.data(), v.size_bytes()); }

    std::uint64_t value() const { return state_; }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace nlwave
