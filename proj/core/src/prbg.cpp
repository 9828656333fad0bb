#include "mcs/prbg.hpp"

#include <bit>

namespace mcs {

Fixed129 prbg_next(const Fixed129& state) noexcept
{
    __extension__ using u128 = unsigned __int128;

    std::uint64_t lo = state.lo, mid = state.mid, top = state.top & 1u;
    if(std::popcount(lo) & 1)
    {
        lo = ~lo;
        mid = ~mid;
        top ^= 1u;
    }

    // 419 * X spans at most 138 bits
    const u128 p0 = static_cast<u128>(lo) * 419u;
    const u128 p1 = static_cast<u128>(mid) * 419u + static_cast<std::uint64_t>(p0 >> 64);
    const std::uint64_t p2 = top * 419u + static_cast<std::uint64_t>(p1 >> 64);
    const auto w0 = static_cast<std::uint64_t>(p0);
    const auto w1 = static_cast<std::uint64_t>(p1);

    Fixed129 next;
    next.lo = (w0 >> 8) | (w1 << 56);
    next.mid = (w1 >> 8) | (p2 << 56);
    next.top = static_cast<std::uint8_t>((p2 >> 8) & 1u);
    return next;
}

BlockBits extract_bits(const Fixed129& state) noexcept
{
    BlockBits bits;
    for(int t = 0; t < kBitsPerBlock; ++t)
        bits[static_cast<std::size_t>(t)] = state.bit(128 - t);
    return bits;
}

PrbsStream generate_prbs(const Fixed129& x0, std::size_t num_blocks)
{
    if(num_blocks == 0)
        throw Error(ErrorKind::DomainError, "generate_prbs needs at least one block");
    std::vector<BlockBits> blocks;
    blocks.reserve(num_blocks);
    Fixed129 x = x0;
    for(std::size_t k = 0; k < num_blocks; ++k)
    {
        blocks.push_back(extract_bits(x));
        if(k + 1 < num_blocks)
            x = prbg_next(x);
    }
    return PrbsStream(std::move(blocks));
}

} // namespace mcs
