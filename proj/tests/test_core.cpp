#include <doctest.h>

#include <algorithm>
#include <random>

#include "support.hpp"

using namespace mcs;

TEST_CASE("hamming weight")
{
    CHECK(hamming_weight(0x00) == 0);
    CHECK(hamming_weight(0xFF) == 8);
    CHECK(hamming_weight(0xA5) == 4);
    for(int a = 0; a < 256; ++a)
    {
        int loop = 0;
        for(int j = 0; j < 8; ++j)
            loop += (a >> j) & 1;
        REQUIRE(hamming_weight(static_cast<Byte>(a)) == loop);
        for(int b = 0; b < 256; b += 17)
            CHECK(hamming_weight(static_cast<Byte>(a ^ b)) == hamming_weight(static_cast<Byte>(b ^ a)));
    }
}

TEST_CASE("block weight")
{
    CHECK(block_weight(Bytes(16, 0)) == 0);
    CHECK(block_weight(Bytes(16, 0xFF)) == 128);
    Bytes b(16, 0);
    b[0] = 0x01;
    b[1] = 0x03;
    CHECK(block_weight(b) == 3);

    std::mt19937_64 rng(3);
    auto blk = test::random_bytes(rng, 16);
    const int w = block_weight(blk);
    for(int i = 0; i < 20; ++i)
    {
        std::shuffle(blk.begin(), blk.end(), rng);
        CHECK(block_weight(blk) == w);
    }
}

TEST_CASE("partition into 15-byte blocks")
{
    Bytes fifteen(15);
    for(int i = 0; i < 15; ++i)
        fifteen[static_cast<std::size_t>(i)] = static_cast<Byte>(i);
    auto one = partition15(fifteen);
    REQUIRE(one.size() == 1);
    CHECK(std::equal(one[0].begin(), one[0].end(), fifteen.begin()));

    Bytes thirty(30);
    for(int i = 0; i < 30; ++i)
        thirty[static_cast<std::size_t>(i)] = static_cast<Byte>(i);
    auto two = partition15(thirty);
    REQUIRE(two.size() == 2);
    CHECK(two[0][0] == 0);
    CHECK(two[0][14] == 14);
    CHECK(two[1][0] == 15);
    CHECK(two[1][14] == 29);

    try
    {
        (void)partition15(Bytes(16));
        FAIL("16 bytes accepted");
    }
    catch(const Error& e)
    {
        CHECK(e.kind() == ErrorKind::NonDivisibleLength);
    }
    CHECK(partition15(Bytes{}).empty());
}

TEST_CASE("xor differential")
{
    std::mt19937_64 rng(5);
    const auto a = test::random_bytes(rng, 30);
    const auto self = xor_differential(a, a);
    CHECK(std::all_of(self.bytes().begin(), self.bytes().end(), [](Byte b) { return b == 0; }));
    const auto id = xor_differential(a, Bytes(30, 0));
    CHECK(std::equal(id.bytes().begin(), id.bytes().end(), a.begin()));

    Bytes x(15, 0), y(15, 0);
    x[0] = 0xF0;
    y[0] = 0x0F;
    CHECK(xor_differential(x, y)[0] == 0xFF);

    CHECK_THROWS_AS(xor_differential(Bytes(15), Bytes(30)), Error);
    try
    {
        (void)xor_differential(Bytes(16), Bytes(16));
        FAIL("length 16 accepted");
    }
    catch(const Error& e)
    {
        CHECK(e.kind() == ErrorKind::NonDivisibleLength);
    }
    try
    {
        (void)xor_bytes(Bytes(3), Bytes(4));
        FAIL("mismatch accepted");
    }
    catch(const Error& e)
    {
        CHECK(e.kind() == ErrorKind::LengthMismatch);
    }
}

TEST_CASE("differential applies by xor")
{
    Bytes d(15, 0);
    d[3] = 0x81;
    Differential diff(d);
    CHECK(diff.num_blocks() == 1);
    Bytes base(15, 0x0F);
    auto p = diff.apply_to(base);
    CHECK(p[3] == 0x8E);
    CHECK(p[0] == 0x0F);
    CHECK_THROWS_AS(Differential(Bytes(14)), Error);
}

TEST_CASE("bit matrix round trip and transpose")
{
    std::mt19937_64 rng(7);
    for(int t = 0; t < 2000; ++t)
    {
        std::array<Byte, 8> rows{};
        for(auto& r : rows)
            r = static_cast<Byte>(rng());
        const auto m = BitMatrix8::from_bytes(rows);
        std::array<Byte, 8> back{};
        m.to_bytes(back);
        REQUIRE(back == rows);
        const auto tr = m.transposed();
        for(int i = 0; i < 8; ++i)
            for(int j = 0; j < 8; ++j)
            {
                REQUIRE(m.get(i, j) == (((rows[static_cast<std::size_t>(i)] >> j) & 1) != 0));
                REQUIRE(tr.get(j, i) == m.get(i, j));
            }
        CHECK(tr.transposed() == m);
    }
    BitMatrix8 m;
    m.set(2, 5, true);
    CHECK(m.row(2) == 0x20);
    m.set_row(7, 0x81);
    CHECK(m.get(7, 0));
    CHECK(m.get(7, 7));
    CHECK_FALSE(m.get(7, 1));
}

TEST_CASE("fixed-point x0 parsing")
{
    // round(0.251 * 2^64) from a rational big-integer evaluation
    const auto x = Fixed129::from_decimal("0.251");
    CHECK(x.lo == 0x404189374BC6A7F0ull);
    CHECK(x.mid == 0);
    CHECK(x.top == 0);
    CHECK(x.to_hex() == "00000000000000000404189374bc6a7f0");

    const auto one = Fixed129::from_decimal("1.0");
    CHECK(one.mid == 1);
    CHECK(one.lo == 0);
    const auto half = Fixed129::from_decimal("0.5");
    CHECK(half.lo == (std::uint64_t{1} << 63));

    const auto h = Fixed129::from_hex("1ffffffffffffffffffffffffffffffff");
    CHECK(h.top == 1);
    CHECK(h.mid == ~std::uint64_t{0});
    CHECK(h.lo == ~std::uint64_t{0});
    CHECK(Fixed129::from_hex(h.to_hex()) == h);
    CHECK(Fixed129::from_hex("0x10") .lo == 16);
    CHECK_THROWS_AS(Fixed129::from_hex("2ffffffffffffffffffffffffffffffff"), Error);
    CHECK_THROWS_AS(Fixed129::from_hex("12g"), Error);
    CHECK_THROWS_AS(Fixed129::from_hex(""), Error);
    CHECK_THROWS_AS(Fixed129::from_hex(std::string(34, '0')), Error);

    Fixed129 b;
    b.set_bit(128, true);
    b.set_bit(64, true);
    b.set_bit(0, true);
    CHECK(b.top == 1);
    CHECK(b.mid == 1);
    CHECK(b.lo == 1);
    CHECK(b.bit(128));
    b.set_bit(64, false);
    CHECK_FALSE(b.bit(64));
}

TEST_CASE("secret key constraints")
{
    SecretKey k;
    CHECK_NOTHROW(k.validate());
    int legal = 0;
    for(int a = -1; a <= 8; ++a)
        for(int b = -1; b <= 8; ++b)
        {
            k.alpha1 = a;
            k.beta1 = b;
            const bool ok = a >= 1 && b >= 1 && a + b <= 7;
            legal += ok ? 1 : 0;
            CHECK(valid_alpha_beta(a, b) == ok);
            if(ok)
                CHECK_NOTHROW(k.validate());
            else
                CHECK_THROWS_AS(k.validate(), Error);
        }
    CHECK(legal == 21);
    k = SecretKey{};
    k.alpha2 = 4;
    k.beta2 = 4;
    CHECK_THROWS_AS(k.validate(), Error);
}
