#include "mcs/core.hpp"

#include <algorithm>
#include <bit>
#include <cctype>

namespace mcs {

bool Fixed129::bit(int index) const noexcept
{
    if(index < 64)
        return (lo >> index) & 1u;
    if(index < 128)
        return (mid >> (index - 64)) & 1u;
    return index == 128 && (top & 1u);
}

void Fixed129::set_bit(int index, bool value) noexcept
{
    auto put = [value](std::uint64_t& word, int pos)
    {
        const auto m = std::uint64_t{1} << pos;
        word = value ? (word | m) : (word & ~m);
    };
    if(index < 64)
        put(lo, index);
    else if(index < 128)
        put(mid, index - 64);
    else if(index == 128)
        top = value ? 1 : 0;
}

Fixed129 Fixed129::from_hex(std::string_view hex)
{
    if(hex.starts_with("0x") || hex.starts_with("0X"))
        hex.remove_prefix(2);
    if(hex.empty() || hex.size() > 33)
        throw Error(ErrorKind::ParseError, "x0 hex must have 1 to 33 digits");

    Fixed129 x;
    int pos = 0;
    for(auto it = hex.rbegin(); it != hex.rend(); ++it, pos += 4)
    {
        const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(*it)));
        int v;
        if(c >= '0' && c <= '9')
            v = c - '0';
        else if(c >= 'a' && c <= 'f')
            v = c - 'a' + 10;
        else
            throw Error(ErrorKind::ParseError, "invalid hex digit in x0");
        for(int b = 0; b < 4; ++b)
        {
            if(!((v >> b) & 1))
                continue;
            if(pos + b > 128)
                throw Error(ErrorKind::ParseError, "x0 exceeds 129 bits");
            x.set_bit(pos + b, true);
        }
    }
    return x;
}

Fixed129 Fixed129::from_decimal(std::string_view text)
{
    const auto dot = text.find('.');
    const auto int_part = text.substr(0, dot);
    auto frac_part = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
    if(int_part.empty() && frac_part.empty())
        throw Error(ErrorKind::ParseError, "empty decimal");

    auto all_digits = [](std::string_view s)
    { return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }); };
    if(!all_digits(int_part) || !all_digits(frac_part))
        throw Error(ErrorKind::ParseError, "invalid decimal literal");

    // integer part occupies raw bits 64..128
    __extension__ using u128 = unsigned __int128;
    u128 ip = 0;
    for(char c : int_part)
    {
        ip = ip * 10 + static_cast<unsigned>(c - '0');
        if(ip >> 65)
            throw Error(ErrorKind::ParseError, "x0 integer part exceeds 65 bits");
    }
    Fixed129 x;
    x.mid = static_cast<std::uint64_t>(ip);
    x.top = static_cast<std::uint8_t>(ip >> 64);

    // fraction: long multiplication by two on the decimal digit string
    std::string digits(frac_part);
    auto double_frac = [&digits]() -> int
    {
        int carry = 0;
        for(auto it = digits.rbegin(); it != digits.rend(); ++it)
        {
            int v = (*it - '0') * 2 + carry;
            carry = v / 10;
            *it = static_cast<char>('0' + v % 10);
        }
        return carry;
    };
    for(int b = 63; b >= 0; --b)
        x.lo |= static_cast<std::uint64_t>(double_frac()) << b;

    // round half away from zero
    if(double_frac())
    {
        if(++x.lo == 0 && ++x.mid == 0)
        {
            if(x.top)
                throw Error(ErrorKind::ParseError, "x0 exceeds 129 bits");
            x.top = 1;
        }
    }
    return x;
}

std::string Fixed129::to_hex() const
{
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out(33, '0');
    for(int d = 0; d < 33; ++d)
    {
        int v = 0;
        for(int b = 0; b < 4; ++b)
            v |= bit(4 * d + b) << b;
        out[32 - d] = kDigits[v];
    }
    return out;
}

void SecretKey::validate() const
{
    if(!valid_alpha_beta(alpha1, beta1))
        throw Error(ErrorKind::InvalidKey, "alpha1/beta1 violate 1 <= alpha < alpha+beta <= 7");
    if(!valid_alpha_beta(alpha2, beta2))
        throw Error(ErrorKind::InvalidKey, "alpha2/beta2 violate 1 <= alpha < alpha+beta <= 7");
    if(x0.top > 1)
        throw Error(ErrorKind::InvalidKey, "x0 exceeds 129 bits");
}

BitMatrix8 BitMatrix8::from_bytes(std::span<const Byte, 8> rows) noexcept
{
    std::uint64_t v = 0;
    for(int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(rows[i]) << (8 * i);
    return BitMatrix8(v);
}

void BitMatrix8::to_bytes(std::span<Byte, 8> rows) const noexcept
{
    for(int i = 0; i < 8; ++i)
        rows[i] = row(i);
}

void BitMatrix8::set(int row, int column, bool value) noexcept
{
    const auto m = std::uint64_t{1} << (8 * row + column);
    bits_ = value ? (bits_ | m) : (bits_ & ~m);
}

void BitMatrix8::set_row(int index, Byte value) noexcept
{
    bits_ &= ~(std::uint64_t{0xFF} << (8 * index));
    bits_ |= static_cast<std::uint64_t>(value) << (8 * index);
}

BitMatrix8 BitMatrix8::transposed() const noexcept
{
    // three rounds of block swaps (2x2, 4x4, 8x8 sub-blocks)
    std::uint64_t x = bits_, t;
    t = (x ^ (x >> 7)) & 0x00AA00AA00AA00AAull;
    x = x ^ t ^ (t << 7);
    t = (x ^ (x >> 14)) & 0x0000CCCC0000CCCCull;
    x = x ^ t ^ (t << 14);
    t = (x ^ (x >> 28)) & 0x00000000F0F0F0F0ull;
    x = x ^ t ^ (t << 28);
    return BitMatrix8(x);
}

Differential::Differential(Bytes bytes) : bytes_(std::move(bytes))
{
    if(bytes_.size() % kPlainBlockSize != 0)
        throw Error(ErrorKind::NonDivisibleLength,
                    "differential length " + std::to_string(bytes_.size()) + " is not a multiple of 15");
}

Bytes Differential::apply_to(std::span<const Byte> base) const
{
    return xor_bytes(base, bytes_);
}

namespace {

// byte popcount without relying on a hardware instruction
constexpr auto kWeights = []
{
    std::array<std::uint8_t, 256> t{};
    for(unsigned v = 0; v < 256; ++v)
        t[v] = static_cast<std::uint8_t>(std::popcount(v));
    return t;
}();

} // namespace

int hamming_weight(Byte b) noexcept
{
    return kWeights[b];
}

int block_weight(std::span<const Byte> block) noexcept
{
    int w = 0;
    for(Byte b : block)
        w += hamming_weight(b);
    return w;
}

std::vector<PlainBlock15> partition15(std::span<const Byte> data)
{
    if(data.size() % kPlainBlockSize != 0)
        throw Error(ErrorKind::NonDivisibleLength,
                    "length " + std::to_string(data.size()) + " is not a multiple of 15");
    std::vector<PlainBlock15> blocks(data.size() / kPlainBlockSize);
    for(std::size_t k = 0; k < blocks.size(); ++k)
        std::copy_n(data.begin() + k * kPlainBlockSize, kPlainBlockSize, blocks[k].begin());
    return blocks;
}

Bytes xor_bytes(std::span<const Byte> a, std::span<const Byte> b)
{
    if(a.size() != b.size())
        throw Error(ErrorKind::LengthMismatch,
                    "lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()) + " differ");
    Bytes out(a.size());
    for(std::size_t i = 0; i < a.size(); ++i)
        out[i] = a[i] ^ b[i];
    return out;
}

Differential xor_differential(std::span<const Byte> a, std::span<const Byte> b)
{
    return Differential(xor_bytes(a, b));
}

} // namespace mcs
