#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mcs/core.hpp"
#include "mcs/prbg.hpp"

namespace mcs {

/// Rotation sub-keys. Bytes 0..7 of a block use (alpha1, beta1), bytes 8..15
/// use (alpha2, beta2), for both the row and the column rotations.
struct RotationParams
{
    int alpha1 = 1;
    int beta1 = 1;
    int alpha2 = 1;
    int beta2 = 1;

    static RotationParams from_key(const SecretKey& key) noexcept
    {
        return {key.alpha1, key.beta1, key.alpha2, key.beta2};
    }
    int alpha(int half) const noexcept { return half == 0 ? alpha1 : alpha2; }
    int beta(int half) const noexcept { return half == 0 ? beta1 : beta2; }
};

struct SwapEntry
{
    std::uint8_t i;
    std::uint8_t j;
    std::uint8_t l; ///< index of the controlling bit within the block, 4..35
};

/// Conditional transpositions applied one after another.
inline constexpr std::array<SwapEntry, 32> kSwapTable{{
    {0, 8, 4},   {1, 9, 5},   {2, 10, 6},  {3, 11, 7},  {4, 12, 8},  {5, 13, 9},   {6, 14, 10},  {7, 15, 11},
    {0, 4, 12},  {1, 5, 13},  {2, 6, 14},  {3, 7, 15},  {8, 12, 16}, {9, 13, 17},  {10, 14, 18}, {11, 15, 19},
    {0, 2, 20},  {1, 3, 21},  {4, 6, 22},  {5, 7, 23},  {8, 10, 24}, {9, 11, 25},  {12, 14, 26}, {13, 15, 27},
    {0, 1, 28},  {2, 3, 29},  {4, 5, 30},  {6, 7, 31},  {8, 9, 32},  {10, 11, 33}, {12, 13, 34}, {14, 15, 35},
}};

/// The running byte appended to each plain block.
struct TempChain
{
    Byte temp = 0;
    friend bool operator==(const TempChain&, const TempChain&) = default;
};

using Amounts16 = std::array<std::uint8_t, 16>;

/// Everything one block of controlling bits decides.
struct BlockControl
{
    int l = 0;                            ///< b0 + 2 b1 + 4 b2 + 8 b3
    std::uint32_t swap_bits = 0;          ///< bit n is b(4+n), i.e. table entry n
    std::uint16_t seed1 = 0;
    std::uint16_t seed2 = 0;
    std::array<std::uint8_t, 8> mask_select{}; ///< B(j) = 2 b(36+2j) + b(37+2j)
    std::array<std::uint16_t, 8> seed_words{}; ///< Seed(j)
    ExpandedBlock16 seed_star{};          ///< byte form of the mask
    Amounts16 row_amounts{};              ///< r-bar per row, half 1 then half 2
    Amounts16 column_amounts{};           ///< s-bar per column, half 1 then half 2
};

BlockControl block_control(const BlockBits& bits, const RotationParams& params);

/// r-bar (or s-bar): alpha + beta*m, mirrored to 8 - (alpha + beta*m) when p is set.
constexpr int rotation_amount(bool p, bool m, int alpha, int beta) noexcept
{
    const int r = alpha + (m ? beta : 0);
    return p ? 8 - r : r;
}

std::uint16_t seed1_of(const BlockBits& bits) noexcept;
std::uint16_t seed2_of(const BlockBits& bits) noexcept;

/// Transposes eight 16-bit seed words into sixteen mask bytes:
/// bit j of byte i is bit i of word j.
ExpandedBlock16 seed_star(const std::array<std::uint16_t, 8>& words) noexcept;
/// Inverse of seed_star.
std::array<std::uint16_t, 8> seed_words(const ExpandedBlock16& star) noexcept;

/// Appends temp; the new temp is the byte at index l of the result.
std::pair<ExpandedBlock16, TempChain> expand_block(std::span<const Byte, kPlainBlockSize> plain, TempChain chain, int l);

ExpandedBlock16 swap_bytes(const ExpandedBlock16& block, std::uint32_t bits) noexcept;
ExpandedBlock16 unswap_bytes(const ExpandedBlock16& block, std::uint32_t bits) noexcept;

/// Only the first eight transpositions (pairs (i, i+8)); `bits` holds b4..b11.
ExpandedBlock16 cross_swap(const ExpandedBlock16& block, std::uint8_t bits) noexcept;

ExpandedBlock16 mask_values(const ExpandedBlock16& block, const BlockBits& bits) noexcept;
ExpandedBlock16 xor_block(const ExpandedBlock16& block, const ExpandedBlock16& mask) noexcept;

/// Element at column c moves to column (c + amount) mod 8.
constexpr Byte rotate_row(Byte row, int amount) noexcept
{
    amount &= 7;
    return static_cast<Byte>((row << amount) | (row >> ((8 - amount) & 7)));
}

Amounts16 row_amounts(const BlockBits& bits, const RotationParams& params) noexcept;
Amounts16 column_amounts(const BlockBits& bits, const RotationParams& params) noexcept;

/// Row i of each half rotated by amounts[8h + i].
ExpandedBlock16 apply_row_rotations(const ExpandedBlock16& block, const Amounts16& amounts) noexcept;
/// Column j of half h shifted down by amounts[8h + j].
ExpandedBlock16 apply_column_rotations(const ExpandedBlock16& block, const Amounts16& amounts) noexcept;
/// 8 - a for every amount, mod 8.
Amounts16 inverse_amounts(const Amounts16& amounts) noexcept;

ExpandedBlock16 rotate_horizontal(const ExpandedBlock16& block, const BlockBits& bits, const RotationParams& params) noexcept;
ExpandedBlock16 rotate_vertical(const ExpandedBlock16& block, const BlockBits& bits, const RotationParams& params) noexcept;

/// Intermediate values of one encrypted block.
struct BlockTrace
{
    ExpandedBlock16 expanded{};
    ExpandedBlock16 swapped{};
    ExpandedBlock16 masked{};
    ExpandedBlock16 horizontal{};
    ExpandedBlock16 cipher{};
};

struct DecryptDiagnostics
{
    /// Blocks whose recovered expanded byte differs from the temp chain.
    std::vector<std::size_t> chain_mismatches;
};

/// A keyed cipher instance. Holds the precomputed per-block controls so that
/// tests may supply arbitrary controlling bits.
class Cipher
{
public:
    Cipher(RotationParams params, Byte secret, PrbsStream prbs);

    /// Generates a stream of `num_blocks` blocks from key.x0.
    static Cipher from_key(const SecretKey& key, std::size_t num_blocks);

    std::size_t num_blocks() const noexcept { return controls_.size(); }
    const PrbsStream& prbs() const noexcept { return prbs_; }
    const RotationParams& params() const noexcept { return params_; }
    Byte secret() const noexcept { return secret_; }
    const BlockControl& control(std::size_t k) const { return controls_.at(k); }

    /// Throws NonDivisibleLength, or DomainError when the input needs more
    /// blocks than the stream holds.
    Bytes encrypt(std::span<const Byte> plain) const;
    Bytes decrypt(std::span<const Byte> cipher) const;
    /// As decrypt, additionally checking the recovered expanded bytes
    /// against the temp chain. Mismatches are reported, never thrown.
    Bytes decrypt_checked(std::span<const Byte> cipher, DecryptDiagnostics& diag) const;

    std::vector<BlockTrace> trace(std::span<const Byte> plain) const;

private:
    void check_blocks(std::size_t blocks) const;

    RotationParams params_;
    Byte secret_;
    PrbsStream prbs_;
    std::vector<BlockControl> controls_;
};

Bytes encrypt(std::span<const Byte> plain, const SecretKey& key);
Bytes decrypt(std::span<const Byte> cipher, const SecretKey& key);

} // namespace mcs
