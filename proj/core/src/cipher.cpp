#include "mcs/cipher.hpp"

#include <algorithm>
#include <string>

namespace mcs {

namespace {

std::uint16_t seed_from(const BlockBits& bits, int first_group)
{
    std::uint16_t s = 0;
    for(int i = 0; i < 16; ++i)
    {
        const std::size_t base = static_cast<std::size_t>(4 * (first_group + i));
        const bool v = bits[base] ^ bits[base + 1] ^ bits[base + 2] ^ bits[base + 3];
        s |= static_cast<std::uint16_t>(v) << i;
    }
    return s;
}

std::uint16_t select_seed(int b, std::uint16_t s1, std::uint16_t s2)
{
    switch(b)
    {
    case 3: return s1;
    case 2: return static_cast<std::uint16_t>(~s1);
    case 1: return s2;
    default: return static_cast<std::uint16_t>(~s2);
    }
}

BitMatrix8 half_matrix(const ExpandedBlock16& block, int half)
{
    return BitMatrix8::from_bytes(std::span<const Byte, 8>(block.data() + 8 * half, 8));
}

void store_half(ExpandedBlock16& block, int half, const BitMatrix8& m)
{
    m.to_bytes(std::span<Byte, 8>(block.data() + 8 * half, 8));
}

} // namespace

std::uint16_t seed1_of(const BlockBits& bits) noexcept { return seed_from(bits, 0); }
std::uint16_t seed2_of(const BlockBits& bits) noexcept { return seed_from(bits, 16); }

ExpandedBlock16 seed_star(const std::array<std::uint16_t, 8>& words) noexcept
{
    ExpandedBlock16 star{};
    for(int i = 0; i < 16; ++i)
        for(int j = 0; j < 8; ++j)
            star[i] |= static_cast<Byte>(((words[j] >> i) & 1u) << j);
    return star;
}

std::array<std::uint16_t, 8> seed_words(const ExpandedBlock16& star) noexcept
{
    std::array<std::uint16_t, 8> words{};
    for(int i = 0; i < 16; ++i)
        for(int j = 0; j < 8; ++j)
            words[j] |= static_cast<std::uint16_t>(((star[i] >> j) & 1u) << i);
    return words;
}

BlockControl block_control(const BlockBits& bits, const RotationParams& params)
{
    BlockControl c;
    c.l = bits[0] | (bits[1] << 1) | (bits[2] << 2) | (bits[3] << 3);
    for(int n = 0; n < 32; ++n)
        c.swap_bits |= static_cast<std::uint32_t>(bits[static_cast<std::size_t>(4 + n)]) << n;
    c.seed1 = seed1_of(bits);
    c.seed2 = seed2_of(bits);
    for(int j = 0; j < 8; ++j)
    {
        c.mask_select[j] = static_cast<std::uint8_t>(2 * bits[static_cast<std::size_t>(36 + 2 * j)] +
                                                     bits[static_cast<std::size_t>(37 + 2 * j)]);
        c.seed_words[j] = select_seed(c.mask_select[j], c.seed1, c.seed2);
    }
    c.seed_star = seed_star(c.seed_words);
    c.row_amounts = row_amounts(bits, params);
    c.column_amounts = column_amounts(bits, params);
    return c;
}

std::pair<ExpandedBlock16, TempChain> expand_block(std::span<const Byte, kPlainBlockSize> plain, TempChain chain, int l)
{
    if(l < 0 || l > 15)
        throw Error(ErrorKind::DomainError, "expansion index out of range");
    ExpandedBlock16 out;
    std::copy(plain.begin(), plain.end(), out.begin());
    out[15] = chain.temp;
    return {out, TempChain{out[static_cast<std::size_t>(l)]}};
}

ExpandedBlock16 swap_bytes(const ExpandedBlock16& block, std::uint32_t bits) noexcept
{
    ExpandedBlock16 out = block;
    for(std::size_t n = 0; n < kSwapTable.size(); ++n)
        if((bits >> n) & 1u)
            std::swap(out[kSwapTable[n].i], out[kSwapTable[n].j]);
    return out;
}

ExpandedBlock16 unswap_bytes(const ExpandedBlock16& block, std::uint32_t bits) noexcept
{
    ExpandedBlock16 out = block;
    for(std::size_t n = kSwapTable.size(); n-- > 0;)
        if((bits >> n) & 1u)
            std::swap(out[kSwapTable[n].i], out[kSwapTable[n].j]);
    return out;
}

ExpandedBlock16 cross_swap(const ExpandedBlock16& block, std::uint8_t bits) noexcept
{
    // the first eight entries commute, so this is also its own inverse
    ExpandedBlock16 out = block;
    for(int i = 0; i < 8; ++i)
        if((bits >> i) & 1u)
            std::swap(out[static_cast<std::size_t>(i)], out[static_cast<std::size_t>(i + 8)]);
    return out;
}

ExpandedBlock16 xor_block(const ExpandedBlock16& block, const ExpandedBlock16& mask) noexcept
{
    ExpandedBlock16 out;
    for(std::size_t i = 0; i < 16; ++i)
        out[i] = block[i] ^ mask[i];
    return out;
}

ExpandedBlock16 mask_values(const ExpandedBlock16& block, const BlockBits& bits) noexcept
{
    const auto s1 = seed1_of(bits), s2 = seed2_of(bits);
    std::array<std::uint16_t, 8> words{};
    for(int j = 0; j < 8; ++j)
    {
        const int b = 2 * bits[static_cast<std::size_t>(36 + 2 * j)] + bits[static_cast<std::size_t>(37 + 2 * j)];
        words[j] = select_seed(b, s1, s2);
    }
    return xor_block(block, seed_star(words));
}

Amounts16 row_amounts(const BlockBits& bits, const RotationParams& params) noexcept
{
    Amounts16 a{};
    for(int h = 0; h < 2; ++h)
    {
        const int base = h == 0 ? 65 : 97;
        for(int i = 0; i < 8; ++i)
            a[8 * h + i] = static_cast<std::uint8_t>(rotation_amount(bits[static_cast<std::size_t>(base + 2 * i)],
                                                                     bits[static_cast<std::size_t>(base + 2 * i + 1)],
                                                                     params.alpha(h), params.beta(h)));
    }
    return a;
}

Amounts16 column_amounts(const BlockBits& bits, const RotationParams& params) noexcept
{
    Amounts16 a{};
    for(int h = 0; h < 2; ++h)
    {
        const int base = h == 0 ? 81 : 113;
        for(int j = 0; j < 8; ++j)
            a[8 * h + j] = static_cast<std::uint8_t>(rotation_amount(bits[static_cast<std::size_t>(base + 2 * j)],
                                                                     bits[static_cast<std::size_t>(base + 2 * j + 1)],
                                                                     params.alpha(h), params.beta(h)));
    }
    return a;
}

ExpandedBlock16 apply_row_rotations(const ExpandedBlock16& block, const Amounts16& amounts) noexcept
{
    ExpandedBlock16 out;
    for(std::size_t i = 0; i < 16; ++i)
        out[i] = rotate_row(block[i], amounts[i]);
    return out;
}

ExpandedBlock16 apply_column_rotations(const ExpandedBlock16& block, const Amounts16& amounts) noexcept
{
    // columns become rows after transposition; rotating those rows moves
    // row i of the original to row i + amount
    ExpandedBlock16 out;
    for(int h = 0; h < 2; ++h)
    {
        BitMatrix8 t = half_matrix(block, h).transposed();
        for(int j = 0; j < 8; ++j)
            t.set_row(j, rotate_row(t.row(j), amounts[static_cast<std::size_t>(8 * h + j)]));
        store_half(out, h, t.transposed());
    }
    return out;
}

Amounts16 inverse_amounts(const Amounts16& amounts) noexcept
{
    Amounts16 inv;
    for(std::size_t i = 0; i < 16; ++i)
        inv[i] = static_cast<std::uint8_t>((8 - amounts[i]) & 7);
    return inv;
}

ExpandedBlock16 rotate_horizontal(const ExpandedBlock16& block, const BlockBits& bits, const RotationParams& params) noexcept
{
    return apply_row_rotations(block, row_amounts(bits, params));
}

ExpandedBlock16 rotate_vertical(const ExpandedBlock16& block, const BlockBits& bits, const RotationParams& params) noexcept
{
    return apply_column_rotations(block, column_amounts(bits, params));
}

Cipher::Cipher(RotationParams params, Byte secret, PrbsStream prbs)
 : params_(params), secret_(secret), prbs_(std::move(prbs))
{
    if(!valid_alpha_beta(params_.alpha1, params_.beta1) || !valid_alpha_beta(params_.alpha2, params_.beta2))
        throw Error(ErrorKind::InvalidKey, "rotation parameters violate 1 <= alpha < alpha+beta <= 7");
    controls_.reserve(prbs_.num_blocks());
    for(std::size_t k = 0; k < prbs_.num_blocks(); ++k)
        controls_.push_back(block_control(prbs_.block(k), params_));
}

Cipher Cipher::from_key(const SecretKey& key, std::size_t num_blocks)
{
    key.validate();
    return Cipher(RotationParams::from_key(key), key.secret, generate_prbs(key.x0, num_blocks));
}

void Cipher::check_blocks(std::size_t blocks) const
{
    if(blocks > controls_.size())
        throw Error(ErrorKind::DomainError, "input needs " + std::to_string(blocks) + " blocks, key stream has " +
                                                std::to_string(controls_.size()));
}

std::vector<BlockTrace> Cipher::trace(std::span<const Byte> plain) const
{
    if(plain.size() % kPlainBlockSize != 0)
        throw Error(ErrorKind::NonDivisibleLength,
                    "plaintext length " + std::to_string(plain.size()) + " is not a multiple of 15");
    const std::size_t blocks = plain.size() / kPlainBlockSize;
    check_blocks(blocks);

    std::vector<BlockTrace> out(blocks);
    TempChain chain{secret_};
    for(std::size_t k = 0; k < blocks; ++k)
    {
        const auto& c = controls_[k];
        auto& t = out[k];
        std::tie(t.expanded, chain) =
            expand_block(std::span<const Byte, kPlainBlockSize>(plain.data() + k * kPlainBlockSize, kPlainBlockSize),
                         chain, c.l);
        t.swapped = swap_bytes(t.expanded, c.swap_bits);
        t.masked = xor_block(t.swapped, c.seed_star);
        t.horizontal = apply_row_rotations(t.masked, c.row_amounts);
        t.cipher = apply_column_rotations(t.horizontal, c.column_amounts);
    }
    return out;
}

Bytes Cipher::encrypt(std::span<const Byte> plain) const
{
    if(plain.size() % kPlainBlockSize != 0)
        throw Error(ErrorKind::NonDivisibleLength,
                    "plaintext length " + std::to_string(plain.size()) + " is not a multiple of 15");
    const std::size_t blocks = plain.size() / kPlainBlockSize;
    check_blocks(blocks);

    Bytes out(blocks * kCipherBlockSize);
    Byte temp = secret_;
    for(std::size_t k = 0; k < blocks; ++k)
    {
        const auto& c = controls_[k];
        ExpandedBlock16 b;
        std::copy_n(plain.data() + k * kPlainBlockSize, kPlainBlockSize, b.begin());
        b[15] = temp;
        temp = b[static_cast<std::size_t>(c.l)];
        b = swap_bytes(b, c.swap_bits);
        b = xor_block(b, c.seed_star);
        b = apply_row_rotations(b, c.row_amounts);
        b = apply_column_rotations(b, c.column_amounts);
        std::copy(b.begin(), b.end(), out.begin() + static_cast<std::ptrdiff_t>(k * kCipherBlockSize));
    }
    return out;
}

Bytes Cipher::decrypt_checked(std::span<const Byte> cipher, DecryptDiagnostics& diag) const
{
    if(cipher.size() % kCipherBlockSize != 0)
        throw Error(ErrorKind::NonDivisibleLength,
                    "ciphertext length " + std::to_string(cipher.size()) + " is not a multiple of 16");
    const std::size_t blocks = cipher.size() / kCipherBlockSize;
    check_blocks(blocks);

    Bytes out(blocks * kPlainBlockSize);
    Byte temp = secret_;
    for(std::size_t k = 0; k < blocks; ++k)
    {
        const auto& c = controls_[k];
        ExpandedBlock16 b;
        std::copy_n(cipher.data() + k * kCipherBlockSize, kCipherBlockSize, b.begin());
        b = apply_column_rotations(b, inverse_amounts(c.column_amounts));
        b = apply_row_rotations(b, inverse_amounts(c.row_amounts));
        b = xor_block(b, c.seed_star);
        b = unswap_bytes(b, c.swap_bits);
        if(b[15] != temp)
            diag.chain_mismatches.push_back(k);
        temp = b[static_cast<std::size_t>(c.l)];
        std::copy_n(b.begin(), kPlainBlockSize, out.begin() + static_cast<std::ptrdiff_t>(k * kPlainBlockSize));
    }
    return out;
}

Bytes Cipher::decrypt(std::span<const Byte> cipher) const
{
    DecryptDiagnostics ignored;
    return decrypt_checked(cipher, ignored);
}

Bytes encrypt(std::span<const Byte> plain, const SecretKey& key)
{
    if(plain.size() % kPlainBlockSize != 0)
        throw Error(ErrorKind::NonDivisibleLength,
                    "plaintext length " + std::to_string(plain.size()) + " is not a multiple of 15");
    if(plain.empty())
        return {};
    return Cipher::from_key(key, plain.size() / kPlainBlockSize).encrypt(plain);
}

Bytes decrypt(std::span<const Byte> cipher, const SecretKey& key)
{
    if(cipher.size() % kCipherBlockSize != 0)
        throw Error(ErrorKind::NonDivisibleLength,
                    "ciphertext length " + std::to_string(cipher.size()) + " is not a multiple of 16");
    if(cipher.empty())
        return {};
    return Cipher::from_key(key, cipher.size() / kCipherBlockSize).decrypt(cipher);
}

} // namespace mcs
