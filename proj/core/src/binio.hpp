#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>

#include "spde/error.hpp"

// Little-endian scalar I/O shared by the binary formats.
namespace spde::detail {

template <class T>
T to_little(T v) noexcept {
    static_assert(sizeof(T) == 4 || sizeof(T) == 8);
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
        std::memcpy(&v, b, sizeof(T));
    }
    return v;
}

template <class T>
void put(std::ostream& os, T v) {
    v = to_little(v);
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is, const char* what) {
    T v;
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw ConfigError(std::string("truncated file while reading ") + what);
    return to_little(v);
}

inline void put_doubles(std::ostream& os, std::span<const double> v) {
    if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    } else {
        for (double x : v) put(os, x);
    }
}

inline void get_doubles(std::istream& is, std::span<double> v, const char* what) {
    if (!is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double))))
        throw ConfigError(std::string("truncated file while reading ") + what);
    if constexpr (std::endian::native == std::endian::big) {
        for (double& x : v) x = to_little(x);
    }
}

}  // namespace spde::detail
