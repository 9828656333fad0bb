#pragma once

#include <random>

#include "mcs/attack.hpp"
#include "mcs/cli/keyfile.hpp"

namespace mcs::test {

inline Bytes random_bytes(std::mt19937_64& rng, std::size_t n)
{
    Bytes b(n);
    for(auto& x : b)
        x = static_cast<Byte>(rng());
    return b;
}

inline SecretKey reference_key()
{
    SecretKey k;
    k.alpha1 = 2;
    k.beta1 = 5;
    k.alpha2 = 3;
    k.beta2 = 4;
    k.secret = 20;
    k.x0 = Fixed129::from_decimal("0.251");
    return k;
}

inline std::string hex(std::span<const Byte> b)
{
    static constexpr char d[] = "0123456789abcdef";
    std::string s;
    for(Byte x : b)
    {
        s += d[x >> 4];
        s += d[x & 15];
    }
    return s;
}

inline Bytes unhex(std::string_view s)
{
    Bytes out;
    auto v = [](char c) { return c <= '9' ? c - '0' : c - 'a' + 10; };
    for(std::size_t i = 0; i + 1 < s.size(); i += 2)
        out.push_back(static_cast<Byte>(v(s[i]) * 16 + v(s[i + 1])));
    return out;
}

/// Cipher over `blocks` blocks of a random legal key.
inline Cipher random_cipher(std::mt19937_64& rng, std::size_t blocks)
{
    return Cipher::from_key(cli::random_key(rng), blocks);
}

} // namespace mcs::test
