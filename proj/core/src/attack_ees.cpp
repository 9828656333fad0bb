#include "mcs/attack.hpp"

#include <bit>
#include <string>

namespace mcs {

namespace {

ExpandedBlock16 cipher_block(std::span<const Byte> data, std::size_t k)
{
    ExpandedBlock16 b;
    std::copy_n(data.data() + k * kCipherBlockSize, kCipherBlockSize, b.begin());
    return b;
}

/// Undoes the recovered column and row rotations.
ExpandedBlock16 derotate(const ExpandedBlock16& c, const Amounts16& rot_x, const Amounts16& rot_y)
{
    return apply_row_rotations(apply_column_rotations(c, inverse_amounts(rot_y)), inverse_amounts(rot_x));
}

void check_length(std::span<const Byte> cipher_diff, std::size_t blocks)
{
    if(cipher_diff.size() != blocks * kCipherBlockSize)
        throw Error(ErrorKind::LengthMismatch, "ciphertext differential length does not match block count");
}

} // namespace

std::pair<Differential, std::vector<std::uint8_t>> gen_vertical_differential(std::size_t num_blocks,
                                                                            std::span<const std::int8_t> l)
{
    if(l.size() != num_blocks)
        throw Error(ErrorKind::LengthMismatch, "index list does not match block count");
    Bytes bytes(num_blocks * kPlainBlockSize, 0);
    std::vector<std::uint8_t> probe(num_blocks);
    Byte e = 0;
    for(std::size_t k = 0; k < num_blocks; ++k)
    {
        Byte* blk = bytes.data() + k * kPlainBlockSize;
        if(e == 0xFF)
        {
            // the expanded byte already fills one side of pair 7
            blk[7] = 0xFF;
            probe[k] = 7;
        }
        else
        {
            blk[0] = blk[8] = 0xFF;
            probe[k] = 0;
        }
        if(k + 1 < num_blocks)
        {
            if(l[k] < 0)
                throw Error(ErrorKind::UnresolvedExpansion, "l(" + std::to_string(k) + ") unknown");
            if(l[k] != 15)
                e = blk[l[k]];
        }
    }
    return {Differential(std::move(bytes)), std::move(probe)};
}

std::vector<Amounts16> recover_vertical_part(std::span<const Byte> cipher_diff)
{
    if(cipher_diff.size() % kCipherBlockSize != 0)
        throw Error(ErrorKind::NonDivisibleLength, "ciphertext differential is not a multiple of 16");
    const std::size_t blocks = cipher_diff.size() / kCipherBlockSize;
    std::vector<Amounts16> rot(blocks);
    for(std::size_t k = 0; k < blocks; ++k)
    {
        for(int h = 0; h < 2; ++h)
        {
            const auto t = BitMatrix8::from_bytes(
                               std::span<const Byte, 8>(cipher_diff.data() + k * kCipherBlockSize + 8 * h, 8))
                               .transposed();
            for(int j = 0; j < 8; ++j)
            {
                const Byte column = t.row(j);
                if(std::popcount(static_cast<unsigned>(column)) != 1)
                    throw Error(ErrorKind::MalformedColumn, "block " + std::to_string(k) + " half " +
                                                                std::to_string(h) + " column " + std::to_string(j));
                rot[k][static_cast<std::size_t>(8 * h + j)] = static_cast<std::uint8_t>(std::countr_zero(column));
            }
        }
    }
    return rot;
}

std::pair<Differential, std::vector<std::uint8_t>> gen_horizontal_differential(std::size_t num_blocks,
                                                                      std::span<const std::int8_t> l)
{
    if(l.size() != num_blocks)
        throw Error(ErrorKind::LengthMismatch, "index list does not match block count");
    Bytes bytes(num_blocks * kPlainBlockSize, 0x01);
    std::vector<std::uint8_t> zero(num_blocks);
    Byte e = 0;
    for(std::size_t k = 0; k < num_blocks; ++k)
    {
        zero[k] = e == 0;
        if(k + 1 < num_blocks)
        {
            if(l[k] < 0)
                throw Error(ErrorKind::UnresolvedExpansion, "l(" + std::to_string(k) + ") unknown");
            if(l[k] != 15)
                e = 0x01;
        }
    }
    return {Differential(std::move(bytes)), std::move(zero)};
}

HorizontalPart recover_horizontal_part(std::span<const Byte> cipher_diff, std::span<const Amounts16> rot_y,
                                       std::span<const std::uint8_t> zero_expanded)
{
    const std::size_t blocks = rot_y.size();
    check_length(cipher_diff, blocks);
    if(zero_expanded.size() != blocks)
        throw Error(ErrorKind::LengthMismatch, "flag list does not match block count");

    HorizontalPart part;
    part.rot_x.resize(blocks);
    part.zero_row.assign(blocks, -1);
    for(std::size_t k = 0; k < blocks; ++k)
    {
        const auto rows = apply_column_rotations(cipher_block(cipher_diff, k), inverse_amounts(rot_y[k]));
        for(int i = 0; i < 16; ++i)
        {
            const Byte r = rows[static_cast<std::size_t>(i)];
            if(r == 0 && zero_expanded[k] && part.zero_row[k] < 0)
            {
                part.zero_row[k] = static_cast<std::int8_t>(i);
                part.rot_x[k][static_cast<std::size_t>(i)] = 0;
                continue;
            }
            if(std::popcount(static_cast<unsigned>(r)) != 1)
                throw Error(ErrorKind::MalformedRow, "block " + std::to_string(k) + " row " + std::to_string(i));
            part.rot_x[k][static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(std::countr_zero(r));
        }
        if(zero_expanded[k] && part.zero_row[k] < 0)
            throw Error(ErrorKind::MalformedRow, "block " + std::to_string(k) + " lacks the expanded byte's empty row");
    }
    return part;
}

std::vector<HalfPerm> recover_byteswap_part(std::span<const std::vector<ExpandedBlock16>> expanded_diffs,
                                            std::span<const Bytes> cipher_diffs, std::span<const std::uint8_t> swap_bits,
                                            std::span<const Amounts16> rot_x, std::span<const Amounts16> rot_y)
{
    const std::size_t blocks = swap_bits.size();
    const std::size_t queries = expanded_diffs.size();
    if(queries == 0 || queries > 8 || cipher_diffs.size() != queries || rot_x.size() != blocks || rot_y.size() != blocks)
        throw Error(ErrorKind::LengthMismatch, "inconsistent inputs to the byte-swap matcher");
    for(std::size_t q = 0; q < queries; ++q)
    {
        if(expanded_diffs[q].size() != blocks)
            throw Error(ErrorKind::LengthMismatch, "expanded differential length mismatch");
        check_length(cipher_diffs[q], blocks);
    }

    std::vector<HalfPerm> perms(blocks);
    for(std::size_t k = 0; k < blocks; ++k)
    {
        // one 64-bit tuple per row: byte q is that row's value in query q
        std::array<std::uint64_t, 16> before{}, after{};
        for(std::size_t q = 0; q < queries; ++q)
        {
            const auto post = cross_swap(expanded_diffs[q][k], swap_bits[k]);
            const auto rows = derotate(cipher_block(cipher_diffs[q], k), rot_x[k], rot_y[k]);
            for(std::size_t i = 0; i < 16; ++i)
            {
                before[i] |= static_cast<std::uint64_t>(post[i]) << (8 * q);
                after[i] |= static_cast<std::uint64_t>(rows[i]) << (8 * q);
            }
        }
        for(int h = 0; h < 2; ++h)
        {
            unsigned used = 0;
            for(int i = 0; i < 8; ++i)
            {
                int match = -1, count = 0;
                for(int e = 0; e < 8; ++e)
                    if(after[static_cast<std::size_t>(8 * h + e)] == before[static_cast<std::size_t>(8 * h + i)])
                    {
                        match = e;
                        ++count;
                    }
                if(count != 1 || ((used >> match) & 1u))
                    throw Error(ErrorKind::AmbiguousMatch, "block " + std::to_string(k) + " half " + std::to_string(h) +
                                                               " row " + std::to_string(i) + " has " +
                                                               std::to_string(count) + " matches");
                used |= 1u << match;
                perms[k][static_cast<std::size_t>(h)][static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(match);
            }
        }
    }
    return perms;
}

MaskingPart recover_masking_part(std::span<const Byte> known_plain, std::span<const Byte> known_cipher,
                                 std::span<const std::int8_t> l, std::span<const std::uint8_t> swap_bits,
                                 std::span<const HalfPerm> perm, std::span<const Amounts16> rot_x,
                                 std::span<const Amounts16> rot_y)
{
    const std::size_t blocks = l.size();
    if(known_plain.size() != blocks * kPlainBlockSize || swap_bits.size() != blocks || perm.size() != blocks ||
       rot_x.size() != blocks || rot_y.size() != blocks)
        throw Error(ErrorKind::LengthMismatch, "inconsistent inputs to the masking recovery");
    check_length(known_cipher, blocks);

    MaskingPart part;
    part.seed_star.resize(blocks);
    part.expanded_unknown.resize(blocks);
    Byte e = 0;
    bool e_known = false; // block 0 carries the secret initial byte
    for(std::size_t k = 0; k < blocks; ++k)
    {
        ExpandedBlock16 x;
        std::copy_n(known_plain.data() + k * kPlainBlockSize, kPlainBlockSize, x.begin());
        x[15] = e;
        part.expanded_unknown[k] = !e_known;

        const auto post = cross_swap(x, swap_bits[k]);
        const auto rows = derotate(cipher_block(known_cipher, k), rot_x[k], rot_y[k]);
        for(std::size_t h = 0; h < 2; ++h)
            for(std::size_t i = 0; i < 8; ++i)
            {
                const std::size_t r = 8 * h + perm[k][h][i];
                part.seed_star[k][r] = rows[r] ^ post[8 * h + i];
            }

        if(k + 1 < blocks && l[k] != 15)
        {
            if(l[k] < 0)
                throw Error(ErrorKind::UnresolvedExpansion, "l(" + std::to_string(k) + ") unknown");
            e = x[static_cast<std::size_t>(l[k])];
            e_known = true;
        }
    }
    return part;
}

Bytes ees_decrypt(std::span<const Byte> cipher, const EquivalentKey& ek)
{
    if(cipher.size() % kCipherBlockSize != 0)
        throw Error(ErrorKind::NonDivisibleLength,
                    "ciphertext length " + std::to_string(cipher.size()) + " is not a multiple of 16");
    const std::size_t blocks = cipher.size() / kCipherBlockSize;
    if(blocks > ek.num_blocks())
        throw Error(ErrorKind::CiphertextTooLong, "ciphertext has " + std::to_string(blocks) +
                                                      " blocks, equivalent key covers " + std::to_string(ek.num_blocks()));
    Bytes out(blocks * kPlainBlockSize);
    for(std::size_t k = 0; k < blocks; ++k)
    {
        const auto& b = ek.blocks[k];
        const auto rows = xor_block(derotate(cipher_block(cipher, k), b.rot_x, b.rot_y), b.seed_star);
        ExpandedBlock16 post;
        for(std::size_t h = 0; h < 2; ++h)
            for(std::size_t i = 0; i < 8; ++i)
                post[8 * h + i] = rows[8 * h + b.perm[h][i]];
        const auto x = cross_swap(post, b.swap_bits);
        std::copy_n(x.begin(), kPlainBlockSize, out.begin() + static_cast<std::ptrdiff_t>(k * kPlainBlockSize));
    }
    return out;
}

} // namespace mcs
