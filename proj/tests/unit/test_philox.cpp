#include <doctest.h>

#include <cmath>

#include "spde/philox.hpp"

using spde::Philox4x32;

// Known-answer vectors from the Random123 distribution (kat_vectors, philox4x32_10).
TEST_CASE("Philox4x32-10 known answers") {
    using C = Philox4x32::Counter;
    using K = Philox4x32::Key;
    CHECK(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox4x32::generate(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
          C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox4x32::generate(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
          C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("uniforms stay inside the open interval") {
    CHECK(spde::uniform_open(0, 0) > 0.0);
    CHECK(spde::uniform_open(0xffffffff, 0xffffffff) < 1.0);
    const auto z = spde::gaussian_pair({0, 0, 0, 0});
    CHECK(std::isfinite(z[0]));
    CHECK(std::isfinite(z[1]));
}
