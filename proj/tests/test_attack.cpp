#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "mcs/attack.hpp"
#include "support.hpp"

using namespace mcs;

namespace {

void force_l(PrbsStream& s, std::size_t k, int l)
{
    for(int t = 0; t < 4; ++t)
        s.set_bit(k, t, ((l >> t) & 1) != 0);
}

struct Run
{
    Cipher cipher;
    EquivalentKey ek;
    AttackDiagnostics diag;
};

Run attack(Cipher cipher, std::mt19937_64& rng)
{
    auto oracle = make_local_oracle(cipher);
    const auto base = test::random_bytes(rng, cipher.num_blocks() * 15);
    AttackDiagnostics d;
    auto ek = run_attack(oracle, base, &d);
    return {std::move(cipher), std::move(ek), std::move(d)};
}

} // namespace

TEST_CASE("expansion differentials")
{
    auto [d1, d2] = gen_expansion_differentials(20);
    CHECK(d1.size() == 300);
    for(std::size_t i = 0; i < 8; ++i)
    {
        CHECK(hamming_weight(d1[i]) == 0);
        CHECK(hamming_weight(d2[i]) == static_cast<int>(i) + 1);
    }
    for(std::size_t i = 0; i < 300; ++i)
    {
        REQUIRE(d1[i] == canonical_byte(expansion_weight1(i)));
        REQUIRE(d2[i] == canonical_byte(expansion_weight2(i)));
    }
    for(std::size_t k = 0; k < 20; ++k)
    {
        std::set<std::pair<int, int>> pairs;
        for(std::size_t i = 15 * k; i < 15 * k + 15; ++i)
            pairs.insert({expansion_weight1(i), expansion_weight2(i)});
        CHECK(pairs.size() == 15);
        CHECK(pairs.count({0, 0}) == 0);
    }
    CHECK(canonical_byte(0) == 0x00);
    CHECK(canonical_byte(8) == 0xFF);
    CHECK(canonical_byte(3) == 0x07);
    CHECK_THROWS_AS(gen_expansion_differentials(0), Error);
}

TEST_CASE("observed weights")
{
    const auto key = test::reference_key();
    const auto c = Cipher::from_key(key, 12);
    auto [d1, d2] = gen_expansion_differentials(12);
    std::mt19937_64 rng(31);
    const auto base = test::random_bytes(rng, 180);
    const auto c0 = c.encrypt(base);
    const auto cd = xor_bytes(c.encrypt(d1.apply_to(base)), c0);
    const auto w = observed_expanded_weights(d1, cd);
    // block 0 shares the starting temp
    CHECK(w[0] == 0);
    // the expanded byte is carried along the temp chain
    int carried = 0;
    for(std::size_t k = 1; k < 12; ++k)
    {
        const int l = c.control(k - 1).l;
        if(l < 15)
            carried = expansion_weight1(15 * (k - 1) + static_cast<std::size_t>(l));
        CHECK(w[k] == carried);
    }

    Bytes bad(cd.size(), 0xFF);
    try
    {
        (void)observed_expanded_weights(d1, bad);
        FAIL("accepted");
    }
    catch(const Error& e)
    {
        CHECK(e.kind() == ErrorKind::InconsistentWeights);
    }
    CHECK_THROWS_AS(observed_expanded_weights(d1, Bytes(16)), Error);
}

TEST_CASE("expansion index recovery")
{
    std::mt19937_64 rng(32);
    for(int t = 0; t < 20; ++t)
    {
        const std::size_t B = 50;
        const auto c = test::random_cipher(rng, B);
        auto [d1, d2] = gen_expansion_differentials(B);
        const auto base = test::random_bytes(rng, 15 * B);
        const auto c0 = c.encrypt(base);
        const auto rec = recover_expansion_indices(d1, d2, xor_bytes(c.encrypt(d1.apply_to(base)), c0),
                                                   xor_bytes(c.encrypt(d2.apply_to(base)), c0));
        REQUIRE(rec.num_blocks() == B);
        CHECK(rec.candidates[B - 1] == 0);
        CHECK(rec.weights1[0] == 0);
        CHECK(rec.weights2[0] == 0);
        for(std::size_t k = 0; k + 1 < B; ++k)
        {
            CHECK(((rec.candidates[k] >> c.control(k).l) & 1) == 1);
            if(!rec.ambiguous(k))
                CHECK(rec.unique_index(k) == c.control(k).l);
        }
    }
}

TEST_CASE("two bytes sharing a weight pair give two candidates")
{
    const std::size_t B = 3;
    auto [g1, g2] = gen_expansion_differentials(B);
    Bytes a(g1.bytes().begin(), g1.bytes().end()), b(g2.bytes().begin(), g2.bytes().end());
    a[5] = a[3];
    b[5] = b[3];
    const Differential d1(a), d2(b);

    std::mt19937_64 rng(33);
    auto prbs = generate_prbs(Fixed129{rng(), rng(), 0}, B);
    force_l(prbs, 0, 3);
    const Cipher c(RotationParams{2, 5, 3, 4}, 20, prbs);
    const auto base = test::random_bytes(rng, 15 * B);
    const auto c0 = c.encrypt(base);
    const auto rec = recover_expansion_indices(d1, d2, xor_bytes(c.encrypt(d1.apply_to(base)), c0),
                                               xor_bytes(c.encrypt(d2.apply_to(base)), c0));
    CHECK(rec.candidates[0] == ((1u << 3) | (1u << 5)));
    CHECK(rec.ambiguous(0));
    CHECK(rec.unique_index(0) == -1);
}

TEST_CASE("sign pattern decoding")
{
    CHECK(decode_swap_bits(23) == std::array<int, 4>{0, 0, 0, 0});
    CHECK(decode_swap_bits(-23) == std::array<int, 4>{1, 1, 1, 1});
    CHECK(decode_swap_bits(7) == std::array<int, 4>{0, 0, 0, 1});
    try
    {
        (void)decode_swap_bits(0);
        FAIL("0 decoded");
    }
    catch(const Error& e)
    {
        CHECK(e.kind() == ErrorKind::InvalidDeltaSum);
    }
    CHECK_THROWS_AS(decode_swap_bits(2), Error);

    const int mag[4] = {4, 5, 6, 8};
    std::set<int> sums;
    for(int s = 0; s < 16; ++s)
    {
        int sum = 0;
        for(int i = 0; i < 4; ++i)
            sum += ((s >> i) & 1) ? -mag[i] : mag[i];
        sums.insert(sum);
        const auto bits = decode_swap_bits(sum);
        for(int i = 0; i < 4; ++i)
            CHECK(bits[static_cast<std::size_t>(i)] == ((s >> i) & 1));
    }
    CHECK(sums == std::set<int>{-23, -15, -13, -11, -7, -5, -3, -1, 1, 3, 5, 7, 11, 13, 15, 23});

    const std::array<int, 8> delta{1, 2, 4, 8, 16, 32, 64, 0};
    CHECK(decode_signed_sum(127, delta, 0x7F) == 0);
    CHECK(decode_signed_sum(127 - 2 * 5, delta, 0x7F) == 5);
    // inactive pairs never flip
    CHECK(decode_signed_sum(3, delta, 0x03) == 0);
    CHECK_THROWS_AS(decode_signed_sum(4, delta, 0x03), Error);

    const int dec[] = {4, 5, 6, 8};
    const int nondec[] = {1, 2, 3};
    CHECK(decodable(dec));
    CHECK_FALSE(decodable(nondec));
}

TEST_CASE("vertical probe parsing")
{
    Bytes diag(32, 0);
    for(int i = 0; i < 8; ++i)
    {
        diag[static_cast<std::size_t>(i)] = static_cast<Byte>(1u << i);
        diag[static_cast<std::size_t>(8 + i)] = static_cast<Byte>(1u << ((i + 3) % 8));
    }
    diag[16 + 2] = 0xFF;
    diag[24] = 0xFF;
    const auto rows = recover_vertical_part(diag);
    REQUIRE(rows.size() == 2);
    for(std::size_t j = 0; j < 8; ++j)
    {
        CHECK(rows[0][j] == j);
        CHECK(rows[0][8 + j] == (j + 5) % 8);
        CHECK(rows[1][j] == 2);
        CHECK(rows[1][8 + j] == 0);
    }
    try
    {
        (void)recover_vertical_part(Bytes(16, 0));
        FAIL("empty columns accepted");
    }
    catch(const Error& e)
    {
        CHECK(e.kind() == ErrorKind::MalformedColumn);
    }
}

TEST_CASE("attack with the reference key")
{
    std::mt19937_64 rng(34);
    const std::size_t B = 96;
    auto r = attack(Cipher::from_key(test::reference_key(), B), rng);
    CHECK(r.diag.queries == 7);
    CHECK(r.ek.num_blocks() == B);
    for(std::size_t k = 0; k + 1 < B; ++k)
        CHECK(r.ek.blocks[k].l == r.cipher.control(k).l);
    CHECK((r.ek.blocks[B - 1].flags & kFlagLUnknown) != 0);

    const auto base = r.diag.plan.base;
    const auto own = ees_decrypt(r.cipher.encrypt(base), r.ek);
    CHECK(own == base);
    for(int t = 0; t < 5; ++t)
    {
        const auto p = test::random_bytes(rng, 15 * B);
        CHECK(ees_decrypt(r.cipher.encrypt(p), r.ek) == p);
    }
    // a prefix decrypts with the same key
    const auto p = test::random_bytes(rng, 15 * 10);
    CHECK(ees_decrypt(r.cipher.encrypt(p), r.ek) == p);

    try
    {
        (void)ees_decrypt(Bytes(16 * (B + 1)), r.ek);
        FAIL("too long accepted");
    }
    catch(const Error& e)
    {
        CHECK(e.kind() == ErrorKind::CiphertextTooLong);
    }
    try
    {
        (void)ees_decrypt(Bytes(17), r.ek);
        FAIL("odd length accepted");
    }
    catch(const Error& e)
    {
        CHECK(e.kind() == ErrorKind::NonDivisibleLength);
    }
}

TEST_CASE("stage roles of the chosen differentials")
{
    std::mt19937_64 rng(35);
    auto r = attack(Cipher::from_key(test::reference_key(), 8), rng);
    const auto& plan = r.diag.plan;
    CHECK(plan.kRoles[0] == std::string("expansion"));
    auto [d1, d2] = gen_expansion_differentials(8);
    CHECK(plan.diffs[0] == d1);
    CHECK(plan.diffs[1] == d2);
    // every chosen differential avoids the zero differential
    for(const auto& d : plan.diffs)
        CHECK(std::any_of(d.bytes().begin(), d.bytes().end(), [](Byte b) { return b != 0; }));
    // all stage timings are reported
    CHECK(r.diag.stage_seconds.size() >= 6);
}

TEST_CASE("attacks on random keys")
{
    std::mt19937_64 rng(36);
    for(int t = 0; t < 10; ++t)
    {
        const std::size_t B = 20 + rng() % 80;
        auto r = attack(test::random_cipher(rng, B), rng);
        CHECK(r.diag.queries == 7);
        const auto p = test::random_bytes(rng, 15 * B);
        CHECK(ees_decrypt(r.cipher.encrypt(p), r.ek) == p);
    }
}

TEST_CASE("forced runs of l = 15 are resolved")
{
    // under the generator l = 15 never repeats, so runs are forced by hand
    std::mt19937_64 rng(37);
    std::size_t ambiguous = 0;
    for(int t = 0; t < 25; ++t)
    {
        const std::size_t B = 200;
        auto key = cli::random_key(rng);
        auto prbs = generate_prbs(key.x0, B);
        std::bernoulli_distribution fifteen(0.5);
        for(std::size_t k = 0; k < B; ++k)
            if(fifteen(rng))
                force_l(prbs, k, 15);
        // one explicit run of four after a normal block
        force_l(prbs, 10, 6);
        for(std::size_t k = 11; k < 15; ++k)
            force_l(prbs, k, 15);
        const Cipher c(RotationParams::from_key(key), key.secret, prbs);
        auto r = attack(c, rng);
        ambiguous += r.diag.ambiguous_blocks;
        for(std::size_t k = 0; k + 1 < B; ++k)
            REQUIRE(r.ek.blocks[k].l == c.control(k).l);
        const auto p = test::random_bytes(rng, 15 * B);
        CHECK(ees_decrypt(c.encrypt(p), r.ek) == p);
    }
    CHECK(ambiguous > 0);
}

TEST_CASE("oracle contract")
{
    EncryptionOracle short_out([](std::span<const Byte> p) { return Bytes(p.size()); });
    try
    {
        (void)short_out(Bytes(15));
        FAIL("wrong length accepted");
    }
    catch(const Error& e)
    {
        CHECK(e.kind() == ErrorKind::LengthMismatch);
    }
    auto ok = make_local_oracle(test::reference_key(), 4);
    CHECK_THROWS_AS(ok(Bytes(14)), Error);
    CHECK(ok.queries() == 0);
    (void)ok(Bytes(30));
    CHECK(ok.queries() == 1);

    // an oracle that changes its key between queries is caught
    std::mt19937_64 rng(38);
    EncryptionOracle fickle([&](std::span<const Byte> p) {
        auto k = cli::random_key(rng);
        return Cipher::from_key(k, p.size() / 15).encrypt(p);
    });
    const auto base = test::random_bytes(rng, 15 * 40);
    CHECK_THROWS_AS(run_attack(fickle, base), AttackFailed);
}

TEST_CASE("recovered rotations match the cipher internals")
{
    std::mt19937_64 rng(39);
    for(int t = 0; t < 10; ++t)
    {
        const std::size_t B = 64;
        auto r = attack(test::random_cipher(rng, B), rng);
        for(std::size_t k = 0; k < B; ++k)
        {
            const auto& eb = r.ek.blocks[k];
            const auto& ctl = r.cipher.control(k);
            // where the within-half swaps move the probe row
            const auto inner = ctl.swap_bits & ~0xFFu;
            for(int h = 0; h < 2; ++h)
            {
                ExpandedBlock16 marker{};
                marker[static_cast<std::size_t>(8 * h + eb.probe_row)] = 1;
                const auto moved = swap_bytes(marker, inner);
                const auto o = static_cast<int>(std::find(moved.begin(), moved.end(), 1) - moved.begin()) - 8 * h;
                REQUIRE((o >= 0 && o < 8));
                std::set<int> distinct;
                for(int j = 0; j < 8; ++j)
                {
                    const auto idx = static_cast<std::size_t>(8 * h + j);
                    CHECK(eb.rot_y[idx] == (ctl.column_amounts[idx] + o) % 8);
                    distinct.insert(eb.rot_y[idx]);
                    if(static_cast<int>(idx) != eb.exempt_row)
                        CHECK(eb.rot_x[idx] == ctl.row_amounts[static_cast<std::size_t>(8 * h + (j + o) % 8)]);
                }
                CHECK(distinct.size() <= 4);
            }
            CHECK(eb.swap_bits == (ctl.swap_bits & 0xFF));
        }
    }
}
