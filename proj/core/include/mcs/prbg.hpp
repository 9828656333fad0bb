#pragma once

#include <bitset>
#include <cstddef>
#include <vector>

#include "mcs/core.hpp"

namespace mcs {

inline constexpr int kBitsPerBlock = 129;

/// One step of the chaotic map:
/// X' = floor(419 * (X xor H) / 2^8) mod 2^129, with H all-ones when the
/// 64 fraction bits have odd parity and zero otherwise.
Fixed129 prbg_next(const Fixed129& state) noexcept;

/// 129 bits of a state, most significant first: bit t = raw bit 128-t.
using BlockBits = std::bitset<kBitsPerBlock>;
BlockBits extract_bits(const Fixed129& state) noexcept;

/// Controlling bits b(0 .. 129B-1), stored per block.
class PrbsStream
{
public:
    PrbsStream() = default;
    explicit PrbsStream(std::vector<BlockBits> blocks) : blocks_(std::move(blocks)) {}

    std::size_t num_blocks() const noexcept { return blocks_.size(); }
    std::size_t size() const noexcept { return blocks_.size() * kBitsPerBlock; }

    /// b(129k + t)
    bool bit(std::size_t k, int t) const { return blocks_.at(k)[static_cast<std::size_t>(t)]; }
    /// b(i)
    bool operator[](std::size_t i) const { return bit(i / kBitsPerBlock, static_cast<int>(i % kBitsPerBlock)); }
    void set_bit(std::size_t k, int t, bool v) { blocks_.at(k)[static_cast<std::size_t>(t)] = v; }

    const BlockBits& block(std::size_t k) const { return blocks_.at(k); }
    BlockBits& block(std::size_t k) { return blocks_.at(k); }

    friend bool operator==(const PrbsStream&, const PrbsStream&) = default;

private:
    std::vector<BlockBits> blocks_;
};

/// Blocks extract_bits(x(0)), extract_bits(x(1)), ... with x(0) = x0.
/// Throws DomainError when num_blocks is zero.
PrbsStream generate_prbs(const Fixed129& x0, std::size_t num_blocks);

} // namespace mcs
