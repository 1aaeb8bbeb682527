#pragma once

#include <array>
#include <cstdint>

namespace spde {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A pure function of (counter, key): any draw can be regenerated from its
/// coordinates without replaying a stream.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter ctr, Key key) noexcept;
};

/// Uniform on the open interval (0, 1) from 64 random bits (52-bit resolution).
double uniform_open(std::uint32_t hi, std::uint32_t lo) noexcept;

/// Two independent standard normals from one Philox block (Box-Muller).
std::array<double, 2> gaussian_pair(const Philox4x32::Counter& block) noexcept;

}  // namespace spde
