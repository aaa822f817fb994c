#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "hardy/grid.hpp"

namespace hardy::io {

/*
 * Binary GridFunction container, all fields little-endian:
 *
 *   offset  size  field
 *   0       8     magic "HARDYGF1"
 *   8       4     uint32 dim (1 or 2)
 *   12      4     uint32 kind (0 = real, 1 = complex)
 *   16      8     float64 half-width L
 *   24      8     uint64 points per axis m
 *   32      ...   m^dim float64 samples (real) or m^dim (re, im) pairs (complex)
 */
inline constexpr std::array<char, 8> kMagic{'H', 'A', 'R', 'D', 'Y', 'G', 'F', '1'};

namespace detail {

template <class T>
void put_le(std::ostream& os, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<unsigned char, sizeof(T)> bytes{};
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
    std::array<unsigned char, sizeof(T)> bytes{};
    is.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
    if (!is) throw ConfigError("truncated grid function container");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

}  // namespace detail

inline void write_binary(std::ostream& os, const GridFunction& f) {
    const auto& g = f.spec();
    const bool real = f.is_real();
    os.write(kMagic.data(), kMagic.size());
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.dim()));
    detail::put_le<std::uint32_t>(os, real ? 0u : 1u);
    detail::put_le<double>(os, g.half_width());
    detail::put_le<std::uint64_t>(os, g.points_per_axis());
    for (const auto& v : f.values()) {
        detail::put_le<double>(os, v.real());
        if (!real) detail::put_le<double>(os, v.imag());
    }
}

inline GridFunction read_binary(std::istream& is) {
    std::array<char, 8> magic{};
    is.read(magic.data(), magic.size());
    if (!is || magic != kMagic) throw ConfigError("not a grid function container (bad magic)");
    const auto dim = detail::get_le<std::uint32_t>(is);
    const auto kind = detail::get_le<std::uint32_t>(is);
    const auto L = detail::get_le<double>(is);
    const auto m = detail::get_le<std::uint64_t>(is);
    if (kind > 1) throw ConfigError("unknown sample kind in container");
    GridSpec spec(static_cast<int>(dim), L, static_cast<std::size_t>(m));
    std::vector<cplx> v(spec.size());
    for (auto& x : v) {
        const double re = detail::get_le<double>(is);
        const double im = kind == 1 ? detail::get_le<double>(is) : 0.0;
        x = {re, im};
    }
    return GridFunction(spec, std::move(v));
}

/// Line-oriented dump for debugging: a header comment, then one sample per
/// line as coordinates followed by the value (real part and, for complex
/// functions, imaginary part).
inline void write_text(std::ostream& os, const GridFunction& f) {
    const auto& g = f.spec();
    const bool real = f.is_real();
    char buf[160];
    std::snprintf(buf, sizeof buf, "# dim=%d L=%.17g m=%zu kind=%s\n", g.dim(), g.half_width(), g.points_per_axis(),
                  real ? "real" : "complex");
    os << buf;
    for (std::size_t k = 0; k < f.size(); ++k) {
        const Point x = g.point(k);
        int n = g.dim() == 1 ? std::snprintf(buf, sizeof buf, "%.17g", x[0])
                             : std::snprintf(buf, sizeof buf, "%.17g %.17g", x[0], x[1]);
        if (real) {
            std::snprintf(buf + n, sizeof buf - static_cast<std::size_t>(n), " %.17g\n", f[k].real());
        } else {
            std::snprintf(buf + n, sizeof buf - static_cast<std::size_t>(n), " %.17g %.17g\n", f[k].real(),
                          f[k].imag());
        }
        os << buf;
    }
}

}  // namespace hardy::io
