#pragma once

// Bit-exact float32 views and single-bit fault injection.
//
// Bit indexing convention (fixed across the whole toolkit and all file
// formats): position 0 is the sign bit, positions 1..8 are the exponent bits
// from most to least significant, positions 9..31 are the fraction bits from
// most to least significant. "Exponent bit 1" therefore means the exponent
// MSB, the bit whose 0->1 flip is the most destructive.

#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "cled/errors.hpp"

namespace cled {

/// A float32 parameter viewed as its raw 32-bit pattern.
struct BitWord32 {
    std::uint32_t raw = 0;

    static BitWord32 from_float(float value) {
        return BitWord32{std::bit_cast<std::uint32_t>(value)};
    }

    /// IEEE-754 binary32 interpretation. Total: zero, denormal, Inf and NaN
    /// patterns all decode to their standard values, so any injected pattern
    /// is representable.
    float to_float() const { return std::bit_cast<float>(raw); }

    std::uint32_t sign() const { return raw >> 31; }
    std::uint32_t exponent() const { return (raw >> 23) & 0xFFu; }
    std::uint32_t fraction() const { return raw & 0x7FFFFFu; }

    bool is_finite() const { return exponent() != 0xFFu; }
    bool is_normal() const { return exponent() != 0u && exponent() != 0xFFu; }

    friend bool operator==(BitWord32 a, BitWord32 b) { return a.raw == b.raw; }
};

/// Bit index in the convention above. Valid range [0, 31].
struct BitPosition {
    int index = 0;

    static constexpr int kSign = 0;
    static constexpr int kExponentMsb = 1;
    static constexpr int kExponentLsb = 8;
    static constexpr int kFractionMsb = 9;
    static constexpr int kFractionLsb = 31;

    bool valid() const { return index >= 0 && index <= 31; }
    bool is_sign() const { return index == 0; }
    bool is_exponent() const { return index >= 1 && index <= 8; }
    bool is_fraction() const { return index >= 9; }

    /// Mask with exactly the addressed bit set in the raw word.
    std::uint32_t mask() const { return 0x80000000u >> index; }

    friend bool operator==(BitPosition a, BitPosition b) { return a.index == b.index; }
    friend auto operator<=>(BitPosition a, BitPosition b) { return a.index <=> b.index; }
};

inline void require_valid(BitPosition pos) {
    if (!pos.valid()) {
        throw PreconditionError("bit position must be in [0, 31], got " +
                                std::to_string(pos.index));
    }
}

/// Recompose sign/exponent/fraction fields into a raw word.
inline BitWord32 compose(std::uint32_t sign, std::uint32_t exponent, std::uint32_t fraction) {
    return BitWord32{(sign << 31) | ((exponent & 0xFFu) << 23) | (fraction & 0x7FFFFFu)};
}

/// Flip exactly one bit. Involution at fixed position.
inline BitWord32 flip_bit(BitWord32 bits, BitPosition pos) {
    require_valid(pos);
    return BitWord32{bits.raw ^ pos.mask()};
}

/// Exact magnitude multiplier caused by a 0->1 flip of exponent bit
/// exp_index (1..8): 2^(2^(8-exp_index)). Returned in double so the
/// exp_index=1 factor 2^128 is representable.
///
/// Not applicable (nullopt) when the bit is already 1, the value is zero,
/// denormal or non-finite, or the flipped pattern is non-finite.
inline std::optional<double> flip_factor(BitWord32 bits, int exp_index) {
    if (exp_index < 1 || exp_index > 8) {
        throw PreconditionError("exponent bit index must be in [1, 8], got " +
                                std::to_string(exp_index));
    }
    const BitPosition pos{exp_index};
    if ((bits.raw & pos.mask()) != 0) {
        return std::nullopt; // bit already 1
    }
    if (!bits.is_normal()) {
        return std::nullopt;
    }
    const BitWord32 flipped = flip_bit(bits, pos);
    if (!flipped.is_finite()) {
        return std::nullopt;
    }
    // Setting exponent bit exp_index adds 2^(8-exp_index) to the biased
    // exponent, which scales the value by exactly that power of two.
    const int exponent_delta = 1 << (8 - exp_index);
    return std::exp2(static_cast<double>(exponent_delta));
}

/// Fraction of parameters whose bit at pos is 1.
double bit_average(std::span<const float> params, BitPosition pos);

} // namespace cled
