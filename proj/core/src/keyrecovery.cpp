#include "mcs/keyrecovery.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

namespace mcs {

RotationSet RotationSet::of(int alpha, int beta) noexcept
{
    RotationSet r;
    for(int v : {alpha, 8 - alpha, alpha + beta, 8 - (alpha + beta)})
        r.mask |= static_cast<std::uint8_t>(1u << (v & 7));
    return r;
}

RotationSet RotationSet::from_members(std::initializer_list<int> members) noexcept
{
    RotationSet r;
    for(int v : members)
        r.mask |= static_cast<std::uint8_t>(1u << (v & 7));
    return r;
}

int RotationSet::size() const noexcept { return std::popcount(static_cast<unsigned>(mask)); }

std::vector<int> RotationSet::members() const
{
    std::vector<int> m;
    for(int v = 0; v < 8; ++v)
        if(contains(v))
            m.push_back(v);
    return m;
}

std::string RotationSet::to_string() const
{
    std::string s = "{";
    for(int v : members())
        s += (s.size() > 1 ? "," : "") + std::to_string(v);
    return s + "}";
}

std::vector<AlphaBeta> legal_alpha_beta()
{
    std::vector<AlphaBeta> out;
    for(int a = 1; a <= 6; ++a)
        for(int b = 1; a + b <= 7; ++b)
            out.push_back({a, b});
    return out;
}

std::pair<RotationSet, RotationSet> recover_rotation_sets(const EquivalentKey& ek)
{
    std::array<RotationSet, 2> r{};
    for(const auto& b : ek.blocks)
        for(int i = 0; i < 16; ++i)
        {
            if(i == b.exempt_row)
                continue;
            const int v = b.rot_x[static_cast<std::size_t>(i)];
            r[static_cast<std::size_t>(i / 8)].mask |= static_cast<std::uint8_t>((1u << (v & 7)) | (1u << ((8 - v) & 7)));
        }
    return {r[0], r[1]};
}

std::vector<AlphaBeta> candidate_alpha_beta(RotationSet r)
{
    std::vector<AlphaBeta> out;
    for(const auto& ab : legal_alpha_beta())
        if(RotationSet::of(ab.alpha, ab.beta) == r)
            out.push_back(ab);
    if(out.empty())
        throw Error(ErrorKind::IllegalSet, "no legal (alpha, beta) yields " + r.to_string());
    return out;
}

namespace {

void check_prop1_args(int alpha, int beta, double p, int n)
{
    if(!valid_alpha_beta(alpha, beta))
        throw Error(ErrorKind::DomainError, "illegal (alpha, beta)");
    if(!(p >= 0.0 && p <= 1.0))
        throw Error(ErrorKind::DomainError, "p must lie in [0, 1]");
    if(n < 1)
        throw Error(ErrorKind::DomainError, "n must be at least 1");
}

} // namespace

double prop1_probability(int alpha, int beta, double p, int n)
{
    check_prop1_args(alpha, beta, p, n);
    if(2 * alpha + beta == 8)
        return 0.0;
    if(n == 1)
        return 1.0;
    return std::pow(p, n) + std::pow(1.0 - p, n);
}

double prop1_montecarlo(int alpha, int beta, double p, int n, std::size_t trials, std::uint64_t seed)
{
    check_prop1_args(alpha, beta, p, n);
    if(trials == 0)
        throw Error(ErrorKind::DomainError, "trials must be at least 1");
    const RotationSet full = RotationSet::of(alpha, beta);
    const std::array<std::array<int, 2>, 2> pairs{{{alpha, 8 - alpha}, {alpha + beta, 8 - alpha - beta}}};

    std::mt19937_64 rng(seed);
    std::bernoulli_distribution first(p);
    std::bernoulli_distribution coin(0.5);
    std::size_t misses = 0;
    for(std::size_t t = 0; t < trials; ++t)
    {
        RotationSet seen;
        for(int i = 0; i < n; ++i)
        {
            const auto& pr = pairs[first(rng) ? 0 : 1];
            const int r = pr[coin(rng) ? 1 : 0];
            seen.mask |= static_cast<std::uint8_t>((1u << (r & 7)) | (1u << ((8 - r) & 7)));
        }
        misses += seen != full;
    }
    return static_cast<double>(misses) / static_cast<double>(trials);
}

bool OffsetEstimate::unique() const noexcept { return std::popcount(static_cast<unsigned>(candidates)) == 1; }

int OffsetEstimate::value() const noexcept { return unique() ? std::countr_zero(static_cast<unsigned>(candidates)) : -1; }

OffsetEstimate candidate_offsets(std::uint8_t observed, RotationSet r) noexcept
{
    OffsetEstimate est;
    for(int o = 0; o < 8; ++o)
    {
        bool ok = true;
        for(int s = 0; s < 8 && ok; ++s)
            if((observed >> s) & 1u)
                ok = r.contains((s - o + 8) & 7);
        if(ok)
            est.candidates |= static_cast<std::uint8_t>(1u << o);
    }
    return est;
}

std::vector<std::array<OffsetEstimate, 2>> determine_s_offsets(const EquivalentKey& ek, RotationSet r1, RotationSet r2)
{
    std::vector<std::array<OffsetEstimate, 2>> out(ek.num_blocks());
    for(std::size_t k = 0; k < ek.num_blocks(); ++k)
        for(int h = 0; h < 2; ++h)
        {
            std::uint8_t observed = 0;
            for(int j = 0; j < 8; ++j)
                observed |= static_cast<std::uint8_t>(1u << ek.blocks[k].rot_y[static_cast<std::size_t>(8 * h + j)]);
            out[k][static_cast<std::size_t>(h)] = candidate_offsets(observed, h == 0 ? r1 : r2);
        }
    return out;
}

namespace {

// local (i, j) of the three swap phases inside one half
constexpr std::array<std::array<std::array<int, 2>, 4>, 3> kPhases{{
    {{{0, 4}, {1, 5}, {2, 6}, {3, 7}}},
    {{{0, 2}, {1, 3}, {4, 6}, {5, 7}}},
    {{{0, 1}, {2, 3}, {4, 5}, {6, 7}}},
}};

/// first controlling bit of phase `ph` for half `h`
constexpr int phase_bit(int h, int ph) noexcept { return 12 + 8 * ph + 4 * h; }

/// Final position of the byte starting at each local row.
std::array<int, 8> replay_phases(const std::array<std::array<bool, 4>, 3>& bits)
{
    std::array<int, 8> at{}; // at[q] = original row now at position q
    for(int q = 0; q < 8; ++q)
        at[static_cast<std::size_t>(q)] = q;
    for(int ph = 0; ph < 3; ++ph)
        for(int n = 0; n < 4; ++n)
            if(bits[static_cast<std::size_t>(ph)][static_cast<std::size_t>(n)])
                std::swap(at[static_cast<std::size_t>(kPhases[ph][n][0])], at[static_cast<std::size_t>(kPhases[ph][n][1])]);
    std::array<int, 8> final_pos{};
    for(int q = 0; q < 8; ++q)
        final_pos[static_cast<std::size_t>(at[static_cast<std::size_t>(q)])] = q;
    return final_pos;
}

} // namespace

void recover_swap_bits_9to35(const EquivalentBlock& block, BlockRecovery& out)
{
    for(int h = 0; h < 2; ++h)
    {
        const int o = out.offset[static_cast<std::size_t>(h)].value();
        if(o < 0)
            continue;
        std::array<int, 8> pi{};
        for(int i = 0; i < 8; ++i)
            pi[static_cast<std::size_t>(i)] = (block.perm[static_cast<std::size_t>(h)][static_cast<std::size_t>(i)] + o) & 7;

        std::array<std::array<bool, 4>, 3> bits{};
        std::array<int, 8> at{};
        for(int q = 0; q < 8; ++q)
            at[static_cast<std::size_t>(q)] = q;

        // each phase fixes which half of the remaining range a byte ends in
        for(int ph = 0; ph < 3; ++ph)
        {
            const int level = 2 - ph; // position bit decided by this phase
            for(int n = 0; n < 4; ++n)
            {
                const int a = kPhases[ph][n][0];
                const int f = pi[static_cast<std::size_t>(at[static_cast<std::size_t>(a)])];
                bits[static_cast<std::size_t>(ph)][static_cast<std::size_t>(n)] = ((f >> level) & 1) != ((a >> level) & 1);
            }
            for(int n = 0; n < 4; ++n)
                if(bits[static_cast<std::size_t>(ph)][static_cast<std::size_t>(n)])
                    std::swap(at[static_cast<std::size_t>(kPhases[ph][n][0])], at[static_cast<std::size_t>(kPhases[ph][n][1])]);
        }

        if(replay_phases(bits) != pi)
            continue; // not a permutation this network can produce
        for(int ph = 0; ph < 3; ++ph)
            for(int n = 0; n < 4; ++n)
                out.set(phase_bit(h, ph) + n, bits[static_cast<std::size_t>(ph)][static_cast<std::size_t>(n)]);
        out.swap_recovered[h] = true;
    }
}

void recover_masking_bits(const EquivalentBlock& block, BlockRecovery& out)
{
    const int o1 = out.offset[0].value(), o2 = out.offset[1].value();
    if(o1 < 0 || o2 < 0)
        return;
    const std::array<int, 2> o{o1, o2};

    ExpandedBlock16 star{};
    for(int h = 0; h < 2; ++h)
        for(int t = 0; t < 8; ++t)
            star[static_cast<std::size_t>(8 * h + t)] =
                block.seed_star[static_cast<std::size_t>(8 * h + ((t - o[static_cast<std::size_t>(h)] + 8) & 7))];
    const auto words = seed_words(star);

    // bit positions of the mask words that can be compared
    std::uint16_t known = 0x1FF;
    if((block.flags & kFlagSeedRowUnknown) && block.exempt_row >= 0)
    {
        const int h = block.exempt_row / 8;
        const int t = ((block.exempt_row % 8) + o[static_cast<std::size_t>(h)]) & 7;
        known &= static_cast<std::uint16_t>(~(1u << (8 * h + t)));
    }

    // low nine bits of Seed1 from b0..b35
    std::uint16_t low = 0;
    for(int i = 0; i < 9; ++i)
    {
        bool v = false, ok = true;
        for(int t = 4 * i; t < 4 * i + 4; ++t)
        {
            ok = ok && out.known(t);
            v ^= out.value(t);
        }
        if(!ok)
            known &= static_cast<std::uint16_t>(~(1u << i));
        low |= static_cast<std::uint16_t>(v) << i;
    }
    if(known == 0)
        return;

    auto is_seed1 = [&](std::uint16_t w) { return ((w ^ low) & known) == 0; };
    auto is_not_seed1 = [&](std::uint16_t w) { return ((w ^ ~low) & known) == 0; };

    // a word matching neither proves Seed2 differs from Seed1 on these bits
    const bool proof = std::any_of(words.begin(), words.end(),
                                   [&](std::uint16_t w) { return !is_seed1(w) && !is_not_seed1(w); });
    if(!proof)
        return;
    for(int j = 0; j < 8; ++j)
    {
        const auto w = words[static_cast<std::size_t>(j)];
        if(is_seed1(w))
        {
            out.set(36 + 2 * j, true);
            out.set(37 + 2 * j, true);
        }
        else if(is_not_seed1(w))
        {
            out.set(36 + 2 * j, true);
            out.set(37 + 2 * j, false);
        }
        else
            out.set(36 + 2 * j, false);
    }
    out.masking_determined = true;
}

namespace {

std::uint8_t admissible_pairs(int amount, const std::vector<AlphaBeta>& cand)
{
    std::uint8_t mask = 0;
    for(const auto& ab : cand)
        for(int p = 0; p < 2; ++p)
            for(int m = 0; m < 2; ++m)
                if(rotation_amount(p, m, ab.alpha, ab.beta) == amount)
                    mask |= static_cast<std::uint8_t>(1u << (2 * p + m));
    return mask;
}

void constrain(BlockRecovery& out, int t, std::uint8_t mask)
{
    if(mask == 0)
        return;
    out.state[static_cast<std::size_t>(t)] = BitState::Constrained;
    out.state[static_cast<std::size_t>(t + 1)] = BitState::Constrained;
    out.pair_mask[static_cast<std::size_t>(t)] = mask;
}

} // namespace

void constrain_rotation_bits(const EquivalentBlock& block, const std::vector<AlphaBeta>& cand1,
                             const std::vector<AlphaBeta>& cand2, BlockRecovery& out)
{
    for(int h = 0; h < 2; ++h)
    {
        const int o = out.offset[static_cast<std::size_t>(h)].value();
        const auto& cand = h == 0 ? cand1 : cand2;
        if(o < 0 || cand.empty())
            continue;
        const int row_base = h == 0 ? 65 : 97;
        const int col_base = h == 0 ? 81 : 113;
        for(int e = 0; e < 8; ++e)
        {
            if(8 * h + e == block.exempt_row)
                continue;
            const int t = (e + o) & 7;
            constrain(out, row_base + 2 * t, admissible_pairs(block.rot_x[static_cast<std::size_t>(8 * h + e)], cand));
        }
        for(int j = 0; j < 8; ++j)
        {
            const int s = (block.rot_y[static_cast<std::size_t>(8 * h + j)] - o + 8) & 7;
            constrain(out, col_base + 2 * j, admissible_pairs(s, cand));
        }
    }
}

RecoveryReport recover_subkeys(const EquivalentKey& ek)
{
    RecoveryReport rep;
    std::tie(rep.r1, rep.r2) = recover_rotation_sets(ek);
    auto try_candidates = [](RotationSet r)
    {
        try
        {
            return candidate_alpha_beta(r);
        }
        catch(const Error&)
        {
            return std::vector<AlphaBeta>{};
        }
    };
    rep.candidates1 = try_candidates(rep.r1);
    rep.candidates2 = try_candidates(rep.r2);

    const auto offsets = determine_s_offsets(ek, rep.r1, rep.r2);
    rep.blocks.resize(ek.num_blocks());
    for(std::size_t k = 0; k < ek.num_blocks(); ++k)
    {
        const auto& b = ek.blocks[k];
        auto& br = rep.blocks[k];
        // offsets are only meaningful against a legal rotation set
        br.offset[0] = rep.candidates1.empty() ? OffsetEstimate{} : offsets[k][0];
        br.offset[1] = rep.candidates2.empty() ? OffsetEstimate{} : offsets[k][1];

        if(b.l >= 0)
            for(int t = 0; t < 4; ++t)
                br.set(t, (b.l >> t) & 1);
        for(int t = 0; t < 8; ++t)
            br.set(4 + t, (b.swap_bits >> t) & 1u);

        recover_swap_bits_9to35(b, br);
        recover_masking_bits(b, br);
        constrain_rotation_bits(b, rep.candidates1, rep.candidates2, br);
    }
    return rep;
}

RecoveryGrade grade_report(const RecoveryReport& report, const PrbsStream& truth)
{
    RecoveryGrade g;
    const std::size_t blocks = std::min(report.blocks.size(), truth.num_blocks());
    for(std::size_t k = 0; k < blocks; ++k)
    {
        const auto& br = report.blocks[k];
        for(int h = 0; h < 2; ++h)
        {
            ++g.offsets_total;
            g.unique_offsets += br.offset[static_cast<std::size_t>(h)].unique();
        }
        g.masking_blocks += br.masking_determined;
        for(int t = 0; t < kBitsPerBlock; ++t)
        {
            const auto st = br.state[static_cast<std::size_t>(t)];
            if(st == BitState::Zero || st == BitState::One)
            {
                ++g.assigned;
                g.wrong += (st == BitState::One) != truth.bit(k, t);
            }
            else if(st == BitState::Constrained && br.pair_mask[static_cast<std::size_t>(t)] != 0)
            {
                ++g.constrained_pairs;
                const int pair = 2 * truth.bit(k, t) + truth.bit(k, t + 1);
                g.constrained_wrong += !((br.pair_mask[static_cast<std::size_t>(t)] >> pair) & 1u);
            }
        }
    }
    return g;
}

} // namespace mcs
