#include "mcs/attack.hpp"

#include <bit>
#include <string>

namespace mcs {

Bytes EncryptionOracle::operator()(std::span<const Byte> plain)
{
    if(plain.size() % kPlainBlockSize != 0)
        throw Error(ErrorKind::NonDivisibleLength, "oracle input is not a multiple of 15 bytes");
    ++queries_;
    Bytes out = fn_(plain);
    if(out.size() != plain.size() / kPlainBlockSize * kCipherBlockSize)
        throw Error(ErrorKind::LengthMismatch, "oracle returned " + std::to_string(out.size()) + " bytes for " +
                                                   std::to_string(plain.size()) + " plaintext bytes");
    return out;
}

EncryptionOracle make_local_oracle(Cipher cipher)
{
    return EncryptionOracle([c = std::move(cipher)](std::span<const Byte> p) { return c.encrypt(p); });
}

EncryptionOracle make_local_oracle(const SecretKey& key, std::size_t num_blocks)
{
    return make_local_oracle(Cipher::from_key(key, num_blocks));
}

int expansion_weight1(std::size_t i) noexcept
{
    const auto pos = static_cast<int>(i % 80);
    return pos < 8 ? 0 : (pos - 8) / 9 + 1;
}

int expansion_weight2(std::size_t i) noexcept
{
    const auto pos = static_cast<int>(i % 80);
    return pos < 8 ? pos + 1 : (pos - 8) % 9;
}

std::pair<Differential, Differential> gen_expansion_differentials(std::size_t num_blocks)
{
    if(num_blocks == 0)
        throw Error(ErrorKind::DomainError, "need at least one block");
    const std::size_t n = num_blocks * kPlainBlockSize;
    Bytes a(n), b(n);
    for(std::size_t i = 0; i < n; ++i)
    {
        a[i] = canonical_byte(expansion_weight1(i));
        b[i] = canonical_byte(expansion_weight2(i));
    }
    return {Differential(std::move(a)), Differential(std::move(b))};
}

std::vector<int> observed_expanded_weights(const Differential& plain_diff, std::span<const Byte> cipher_diff)
{
    const std::size_t blocks = plain_diff.num_blocks();
    if(cipher_diff.size() != blocks * kCipherBlockSize)
        throw Error(ErrorKind::LengthMismatch, "ciphertext differential does not match plaintext differential");
    std::vector<int> w(blocks);
    for(std::size_t k = 0; k < blocks; ++k)
    {
        w[k] = block_weight(cipher_diff.subspan(k * kCipherBlockSize, kCipherBlockSize)) - block_weight(plain_diff.block(k));
        if(w[k] < 0 || w[k] > 8)
            throw Error(ErrorKind::InconsistentWeights,
                        "block " + std::to_string(k) + " gains " + std::to_string(w[k]) + " bits");
    }
    return w;
}

bool ExpansionRecovery::ambiguous(std::size_t k) const noexcept
{
    return std::popcount(candidates[k]) > 1;
}

int ExpansionRecovery::unique_index(std::size_t k) const noexcept
{
    return std::popcount(candidates[k]) == 1 ? std::countr_zero(candidates[k]) : -1;
}

ExpansionRecovery recover_expansion_indices(const Differential& d1, const Differential& d2,
                                            std::span<const Byte> c1, std::span<const Byte> c2)
{
    if(d1.size() != d2.size())
        throw Error(ErrorKind::LengthMismatch, "expansion differentials differ in length");

    ExpansionRecovery rec;
    rec.weights1 = observed_expanded_weights(d1, c1);
    rec.weights2 = observed_expanded_weights(d2, c2);
    const std::size_t blocks = d1.num_blocks();
    rec.candidates.assign(blocks, 0);
    rec.dup.assign(blocks, -1);
    rec.collision.assign(blocks, -1);

    if(blocks > 0 && (rec.weights1[0] != 0 || rec.weights2[0] != 0))
        throw Error(ErrorKind::InconsistentWeights, "first block's expanded byte changed between queries");

    for(std::size_t m = 0; m < blocks; ++m)
        for(int p = 0; p < 15; ++p)
            if(hamming_weight(d1[m * kPlainBlockSize + p]) == rec.weights1[m] &&
               hamming_weight(d2[m * kPlainBlockSize + p]) == rec.weights2[m])
                rec.collision[m] = static_cast<std::int8_t>(p);

    for(std::size_t k = 1; k < blocks; ++k)
    {
        const std::size_t m = k - 1;
        const int w1 = rec.weights1[k], w2 = rec.weights2[k];
        std::uint16_t mask = 0;
        for(int p = 0; p < 15; ++p)
        {
            if(hamming_weight(d1[m * kPlainBlockSize + p]) == w1 && hamming_weight(d2[m * kPlainBlockSize + p]) == w2)
            {
                mask |= static_cast<std::uint16_t>(1u << p);
                rec.dup[m] = static_cast<std::int8_t>(p);
            }
        }
        if(rec.weights1[m] == w1 && rec.weights2[m] == w2)
            mask |= 1u << 15;
        if(mask == 0)
            throw Error(ErrorKind::InconsistentWeights,
                        "no byte of block " + std::to_string(m) + " has weights (" + std::to_string(w1) + "," +
                            std::to_string(w2) + ")");
        if(std::popcount(mask) > 2)
            throw Error(ErrorKind::InconsistentWeights, "expansion differentials repeat within block " + std::to_string(m));
        if(std::popcount(mask) == 1)
            rec.dup[m] = -1;
        rec.candidates[m] = mask;
    }
    return rec;
}

std::vector<ExpandedBlock16> expanded_differential(const Differential& d, std::span<const std::int8_t> l)
{
    const std::size_t blocks = d.num_blocks();
    if(l.size() != blocks)
        throw Error(ErrorKind::LengthMismatch, "index list does not match differential");
    std::vector<ExpandedBlock16> out(blocks);
    Byte e = 0;
    for(std::size_t k = 0; k < blocks; ++k)
    {
        auto blk = d.block(k);
        std::copy(blk.begin(), blk.end(), out[k].begin());
        out[k][15] = e;
        if(l[k] >= 0)
            e = out[k][static_cast<std::size_t>(l[k])];
        else if(k + 1 < blocks)
            throw Error(ErrorKind::UnresolvedExpansion, "l(" + std::to_string(k) + ") unknown");
    }
    return out;
}

} // namespace mcs
