#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcs/error.hpp"

namespace mcs {

using Byte = std::uint8_t;
using Bytes = std::vector<Byte>;

inline constexpr std::size_t kPlainBlockSize = 15;
inline constexpr std::size_t kCipherBlockSize = 16;

using PlainBlock15 = std::array<Byte, kPlainBlockSize>;
using ExpandedBlock16 = std::array<Byte, kCipherBlockSize>;

/// Unsigned 129-bit fixed-point number x = raw * 2^-64.
///
/// Raw bit j+64 is the coefficient of 2^j, so bits 0..63 are the fraction
/// and bits 64..128 the integer part.
struct Fixed129
{
    std::uint64_t lo = 0;  ///< raw bits 0..63
    std::uint64_t mid = 0; ///< raw bits 64..127
    std::uint8_t top = 0;  ///< raw bit 128 (0 or 1)

    bool bit(int index) const noexcept;
    void set_bit(int index, bool value) noexcept;

    /// Up to 33 hexadecimal digits, most significant first.
    static Fixed129 from_hex(std::string_view hex);
    /// Decimal literal such as "0.251", rounded to the nearest multiple of 2^-64
    /// (ties away from zero).
    static Fixed129 from_decimal(std::string_view text);
    /// Exactly 33 lowercase hexadecimal digits.
    std::string to_hex() const;

    friend bool operator==(const Fixed129&, const Fixed129&) = default;
};

/// True when 1 <= alpha < alpha + beta <= 7.
constexpr bool valid_alpha_beta(int alpha, int beta) noexcept
{
    return alpha >= 1 && beta >= 1 && alpha + beta <= 7;
}

struct SecretKey
{
    int alpha1 = 1;
    int beta1 = 1;
    int alpha2 = 1;
    int beta2 = 1;
    Byte secret = 0;
    Fixed129 x0{};

    /// Throws Error(InvalidKey) when a sub-key is out of range.
    void validate() const;

    friend bool operator==(const SecretKey&, const SecretKey&) = default;
};

/// 8x8 binary matrix; element (i, j) is bit j of byte i.
class BitMatrix8
{
public:
    BitMatrix8() = default;
    explicit BitMatrix8(std::uint64_t packed) noexcept : bits_(packed) {}

    static BitMatrix8 from_bytes(std::span<const Byte, 8> rows) noexcept;
    void to_bytes(std::span<Byte, 8> rows) const noexcept;

    bool get(int row, int column) const noexcept { return (bits_ >> (8 * row + column)) & 1u; }
    void set(int row, int column, bool value) noexcept;

    Byte row(int index) const noexcept { return static_cast<Byte>(bits_ >> (8 * index)); }
    void set_row(int index, Byte value) noexcept;

    BitMatrix8 transposed() const noexcept;
    std::uint64_t packed() const noexcept { return bits_; }

    friend bool operator==(const BitMatrix8&, const BitMatrix8&) = default;

private:
    std::uint64_t bits_ = 0;
};

/// XOR of two equal-length plaintexts; length is a multiple of 15.
class Differential
{
public:
    Differential() = default;
    /// Throws NonDivisibleLength when bytes.size() % 15 != 0.
    explicit Differential(Bytes bytes);

    std::size_t size() const noexcept { return bytes_.size(); }
    std::size_t num_blocks() const noexcept { return bytes_.size() / kPlainBlockSize; }
    Byte operator[](std::size_t i) const noexcept { return bytes_[i]; }
    std::span<const Byte> bytes() const noexcept { return bytes_; }
    std::span<const Byte> block(std::size_t k) const noexcept
    {
        return std::span<const Byte>(bytes_).subspan(k * kPlainBlockSize, kPlainBlockSize);
    }

    /// Plaintext obtained by XORing this differential onto `base`.
    Bytes apply_to(std::span<const Byte> base) const;

    friend bool operator==(const Differential&, const Differential&) = default;

private:
    Bytes bytes_;
};

int hamming_weight(Byte b) noexcept;
int block_weight(std::span<const Byte> block) noexcept;

std::vector<PlainBlock15> partition15(std::span<const Byte> data);

/// Element-wise XOR; throws LengthMismatch.
Bytes xor_bytes(std::span<const Byte> a, std::span<const Byte> b);
/// As xor_bytes, additionally requiring a length divisible by 15.
Differential xor_differential(std::span<const Byte> a, std::span<const Byte> b);

} // namespace mcs
