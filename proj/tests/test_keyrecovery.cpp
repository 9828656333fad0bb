#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "mcs/keyrecovery.hpp"
#include "support.hpp"

using namespace mcs;

namespace {

std::vector<AlphaBeta> sorted(std::vector<AlphaBeta> v)
{
    std::sort(v.begin(), v.end());
    return v;
}

OffsetEstimate offset_of(int o)
{
    return OffsetEstimate{static_cast<std::uint8_t>(1u << o)};
}

EquivalentKey attack_key(const SecretKey& key, std::size_t blocks, std::mt19937_64& rng)
{
    auto oracle = make_local_oracle(key, blocks);
    return run_attack(oracle, test::random_bytes(rng, 15 * blocks));
}

} // namespace

TEST_CASE("rotation sets")
{
    CHECK(RotationSet::of(2, 5) == RotationSet::from_members({1, 2, 6, 7}));
    CHECK(RotationSet::of(2, 4) == RotationSet::from_members({2, 6}));
    CHECK(RotationSet::of(1, 6).to_string() == "{1,7}");
    CHECK(RotationSet::of(4, 2).size() == 3);
    CHECK(RotationSet::of(4, 2).contains(4));
    CHECK_FALSE(RotationSet::of(4, 2).contains(8));
    CHECK(legal_alpha_beta().size() == 21);
}

TEST_CASE("candidate pairs per set")
{
    using V = std::vector<AlphaBeta>;
    CHECK(candidate_alpha_beta(RotationSet::from_members({1, 7})) == V{{1, 6}});
    CHECK(candidate_alpha_beta(RotationSet::from_members({2, 6})) == V{{2, 4}});
    CHECK(candidate_alpha_beta(RotationSet::from_members({3, 5})) == V{{3, 2}});
    CHECK(sorted(candidate_alpha_beta(RotationSet::from_members({4, 2, 6}))) == V{{2, 2}, {4, 2}});
    CHECK(sorted(candidate_alpha_beta(RotationSet::from_members({1, 3, 5, 7}))) == V{{1, 2}, {1, 4}, {3, 4}, {5, 2}});
    CHECK(sorted(candidate_alpha_beta(RotationSet::from_members({1, 2, 6, 7}))) == V{{1, 1}, {1, 5}, {2, 5}, {6, 1}});
    try
    {
        (void)candidate_alpha_beta(RotationSet::from_members({1, 2}));
        FAIL("illegal set accepted");
    }
    catch(const Error& e)
    {
        CHECK(e.kind() == ErrorKind::IllegalSet);
    }

    std::map<std::size_t, int> split;
    for(const auto& ab : legal_alpha_beta())
    {
        const auto c = candidate_alpha_beta(RotationSet::of(ab.alpha, ab.beta));
        CHECK(std::find(c.begin(), c.end(), ab) != c.end());
        ++split[c.size()];
    }
    CHECK(split[1] == 3);
    CHECK(split[2] == 6);
    CHECK(split[4] == 12);
    CHECK(split.size() == 3);
}

TEST_CASE("hidden rotation set probability")
{
    for(double p : {0.25, 0.5, 0.75})
        for(int n : {1, 2, 8})
            CHECK(prop1_probability(2, 4, p, n) == 0.0);
    CHECK(prop1_probability(1, 1, 0.3, 1) == 1.0);
    CHECK(prop1_probability(1, 1, 0.5, 8) == doctest::Approx(0.0078125).epsilon(1e-12));
    CHECK(prop1_probability(1, 1, 0.25, 2) == doctest::Approx(0.25 * 0.25 + 0.75 * 0.75).epsilon(1e-12));
    CHECK_THROWS_AS(prop1_probability(4, 4, 0.5, 2), Error);
    CHECK_THROWS_AS(prop1_probability(1, 1, 1.5, 2), Error);
    CHECK_THROWS_AS(prop1_probability(1, 1, 0.5, 0), Error);

    const double sigma = std::sqrt(0.25 / 1e5);
    CHECK(std::abs(prop1_montecarlo(1, 1, 0.5, 2, 100000, 7) - 0.5) < 3 * sigma);
    CHECK(prop1_montecarlo(3, 4, 0.5, 1, 1000, 7) == 1.0);
    CHECK(prop1_montecarlo(2, 4, 0.5, 4, 1000, 7) == 0.0);
    CHECK(prop1_montecarlo(1, 1, 0.5, 2, 5000, 9) == prop1_montecarlo(1, 1, 0.5, 2, 5000, 9));
}

TEST_CASE("offset candidates")
{
    const auto r17 = RotationSet::from_members({1, 7});
    for(int o = 0; o < 8; ++o)
    {
        const auto obs = static_cast<std::uint8_t>((1u << ((1 + o) & 7)) | (1u << ((7 + o) & 7)));
        const auto est = candidate_offsets(obs, r17);
        CHECK(est.unique());
        CHECK(est.value() == o);
    }
    // {1,3,5,7} fixes only the parity of the offset
    const auto odd = RotationSet::from_members({1, 3, 5, 7});
    CHECK(candidate_offsets(odd.mask, odd).candidates == 0x55);
    CHECK(candidate_offsets(static_cast<std::uint8_t>(odd.mask << 1 | odd.mask >> 7), odd).candidates == 0xAA);
    // {2,6} is symmetric under a shift of four
    const auto r26 = RotationSet::from_members({2, 6});
    CHECK(candidate_offsets(r26.mask, r26).candidates == 0x11);
    CHECK(candidate_offsets(0, r26).candidates == 0xFF);
    CHECK_FALSE(candidate_offsets(0, r26).unique());
    CHECK(candidate_offsets(0, r26).value() == -1);
}

TEST_CASE("degenerate single-block rotation set")
{
    EquivalentKey ek;
    ek.blocks.resize(1);
    ek.blocks[0].rot_x.fill(3);
    ek.blocks[0].rot_x[9] = 5;
    auto [r1, r2] = recover_rotation_sets(ek);
    CHECK(r1 == RotationSet::from_members({3, 5}));
    CHECK(r2 == RotationSet::from_members({3, 5}));
}

TEST_CASE("swap bits from permutations")
{
    EquivalentBlock b;
    for(int h = 0; h < 2; ++h)
        for(int i = 0; i < 8; ++i)
            b.perm[static_cast<std::size_t>(h)][static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
    BlockRecovery out;
    out.offset = {offset_of(0), offset_of(0)};
    recover_swap_bits_9to35(b, out);
    for(int t = 12; t < 36; ++t)
    {
        CHECK(out.known(t));
        CHECK_FALSE(out.value(t));
    }

    // an ambiguous offset leaves that half alone
    BlockRecovery half;
    half.offset = {offset_of(0), OffsetEstimate{0x11}};
    recover_swap_bits_9to35(b, half);
    CHECK(half.swap_recovered[0]);
    CHECK_FALSE(half.swap_recovered[1]);
    for(int t : {16, 19, 24, 27, 32, 35})
        CHECK(half.state[static_cast<std::size_t>(t)] == BitState::Unknown);
    for(int t : {12, 15, 20, 23, 28, 31})
        CHECK(half.known(t));
}

TEST_CASE("masking bits need a word that tells the seeds apart")
{
    EquivalentBlock b;
    b.seed_star.fill(0xFF); // every word is the complement of a zero seed
    BlockRecovery out;
    out.offset = {offset_of(0), offset_of(0)};
    for(int t = 0; t < 36; ++t)
        out.set(t, false);
    recover_masking_bits(b, out);
    CHECK_FALSE(out.masking_determined);
    CHECK(out.state[36] == BitState::Unknown);

    BlockRecovery amb;
    amb.offset = {offset_of(0), OffsetEstimate{}};
    recover_masking_bits(b, amb);
    CHECK_FALSE(amb.masking_determined);
}

TEST_CASE("rotation bit constraints")
{
    auto pairs_for = [](std::initializer_list<int> members, int amount) {
        EquivalentBlock b;
        b.rot_x.fill(static_cast<std::uint8_t>(amount));
        b.rot_y.fill(static_cast<std::uint8_t>(amount));
        const auto cand = candidate_alpha_beta(RotationSet::from_members(members));
        BlockRecovery out;
        out.offset = {offset_of(0), offset_of(0)};
        constrain_rotation_bits(b, cand, cand, out);
        CHECK(out.state[65] == BitState::Constrained);
        CHECK(out.state[66] == BitState::Constrained);
        CHECK(out.pair_mask[81] == out.pair_mask[65]);
        CHECK(out.pair_mask[97] == out.pair_mask[65]);
        return out.pair_mask[65];
    };
    // bit 2p + m of the mask
    CHECK(pairs_for({1, 7}, 1) == 0b1001);
    CHECK(pairs_for({1, 7}, 7) == 0b0110);
    CHECK(pairs_for({4, 2, 6}, 4) == 0b1111);
    CHECK(pairs_for({1, 2, 6, 7}, 2) == 0b1111);
    CHECK(pairs_for({1, 2, 6, 7}, 7) == 0b0110);
}

TEST_CASE("reference key recovery")
{
    std::mt19937_64 rng(41);
    const auto key = test::reference_key();
    const std::size_t B = 128;
    const auto ek = attack_key(key, B, rng);
    const auto rep = recover_subkeys(ek);
    CHECK(rep.r1 == RotationSet::from_members({1, 2, 6, 7}));
    CHECK(rep.r2 == RotationSet::of(3, 4));
    CHECK(rep.candidates1.size() == 4);
    CHECK(std::find(rep.candidates1.begin(), rep.candidates1.end(), AlphaBeta{2, 5}) != rep.candidates1.end());
    const auto g = grade_report(rep, generate_prbs(key.x0, B));
    CHECK(g.wrong == 0);
    CHECK(g.constrained_wrong == 0);
    CHECK(g.assigned > 0);

    auto k24 = key;
    k24.alpha1 = 2;
    k24.beta1 = 4;
    const auto rep24 = recover_subkeys(attack_key(k24, B, rng));
    CHECK(rep24.candidates1 == std::vector<AlphaBeta>{{2, 4}});
}

TEST_CASE("every legal pair yields its rotation set")
{
    std::mt19937_64 rng(42);
    const auto all = legal_alpha_beta();
    for(std::size_t i = 0; i < all.size(); ++i)
    {
        auto key = cli::random_key(rng);
        key.alpha1 = all[i].alpha;
        key.beta1 = all[i].beta;
        key.alpha2 = all[(i + 7) % 21].alpha;
        key.beta2 = all[(i + 7) % 21].beta;
        const auto [r1, r2] = recover_rotation_sets(attack_key(key, 256, rng));
        CHECK(r1 == RotationSet::of(key.alpha1, key.beta1));
        CHECK(r2 == RotationSet::of(key.alpha2, key.beta2));
    }
}

TEST_CASE("recovered bits agree with the stream")
{
    std::mt19937_64 rng(43);
    std::size_t masking = 0, total = 0;
    for(int t = 0; t < 12; ++t)
    {
        const auto key = cli::random_key(rng);
        const std::size_t B = 64;
        const auto rep = recover_subkeys(attack_key(key, B, rng));
        const auto truth = generate_prbs(key.x0, B);
        const auto g = grade_report(rep, truth);
        CHECK(g.wrong == 0);
        CHECK(g.constrained_wrong == 0);
        masking += g.masking_blocks;
        total += B;
        // l and b4..b11 are always known except l of the last block
        for(std::size_t k = 0; k + 1 < B; ++k)
            for(int i = 0; i < 12; ++i)
                REQUIRE(rep.blocks[k].known(i));
    }
    CHECK(masking > total / 4);
}
