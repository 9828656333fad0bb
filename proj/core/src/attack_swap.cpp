#include "mcs/attack.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <bit>
#include <string>

namespace mcs {

bool decodable(std::span<const int> magnitudes) noexcept
{
    const std::size_t n = magnitudes.size();
    if(n > 8)
        return false;
    for(int m : magnitudes)
        if(m == 0)
            return false;
    std::array<int, 256> sums{};
    for(std::size_t s = 0; s < (std::size_t{1} << n); ++s)
    {
        int v = 0;
        for(std::size_t i = 0; i < n; ++i)
            v += ((s >> i) & 1u) ? -magnitudes[i] : magnitudes[i];
        sums[s] = v;
    }
    std::sort(sums.begin(), sums.begin() + static_cast<std::ptrdiff_t>(std::size_t{1} << n));
    return std::adjacent_find(sums.begin(), sums.begin() + static_cast<std::ptrdiff_t>(std::size_t{1} << n)) ==
           sums.begin() + static_cast<std::ptrdiff_t>(std::size_t{1} << n);
}

std::uint8_t decode_signed_sum(int delta_sum, const std::array<int, 8>& delta, std::uint8_t active)
{
    int found = -1, matches = 0;
    // every subset of the active pairs, the empty one included
    unsigned s = 0;
    do
    {
        int v = 0;
        for(int i = 0; i < 8; ++i)
            if((active >> i) & 1u)
                v += ((s >> i) & 1u) ? -delta[static_cast<std::size_t>(i)] : delta[static_cast<std::size_t>(i)];
        if(v == delta_sum)
        {
            found = static_cast<int>(s);
            ++matches;
        }
        s = (s - active) & active;
    } while(s != 0);
    if(matches != 1)
        throw Error(ErrorKind::InvalidDeltaSum, "half-weight difference " + std::to_string(delta_sum) + " matches " +
                                                    std::to_string(matches) + " swap patterns");
    return static_cast<std::uint8_t>(found);
}

std::array<int, 4> decode_swap_bits(int delta_sum)
{
    const std::uint8_t s = decode_signed_sum(delta_sum, {4, 5, 6, 8, 0, 0, 0, 0}, 0x0F);
    return {s & 1, (s >> 1) & 1, (s >> 2) & 1, (s >> 3) & 1};
}

namespace {

constexpr std::uint8_t kStandardSet = 0x0F;
constexpr std::array<int, 4> kStandardMagnitudes{4, 5, 6, 8};

/// Decodable magnitude lists of a given length in preference order. The
/// standard list and its subsets lead.
std::vector<std::vector<int>> magnitude_lists(std::size_t n)
{
    std::vector<std::vector<int>> preferred, rest;
    for(unsigned mask = 0; mask < 256; ++mask) // bit m-1 selects magnitude m
    {
        if(static_cast<std::size_t>(std::popcount(mask)) != n)
            continue;
        std::vector<int> v;
        for(int m = 1; m <= 8; ++m)
            if((mask >> (m - 1)) & 1u)
                v.push_back(m);
        if(!decodable(v))
            continue;
        const bool standard = std::all_of(v.begin(), v.end(), [](int m) { return m == 4 || m == 5 || m == 6 || m == 8; });
        (standard ? preferred : rest).push_back(std::move(v));
    }
    // {2,4,8} pairs well with an odd magnitude
    std::stable_partition(rest.begin(), rest.end(), [](const std::vector<int>& v)
                          { return std::all_of(v.begin(), v.end(), [](int m) { return m == 2 || m == 4 || m == 8; }); });
    preferred.insert(preferred.end(), rest.begin(), rest.end());
    return preferred;
}

const std::vector<std::vector<int>>& lists_of(std::size_t n)
{
    static const std::array<std::vector<std::vector<int>>, 5> cache{
        magnitude_lists(0), magnitude_lists(1), magnitude_lists(2), magnitude_lists(3), magnitude_lists(4)};
    return cache.at(n);
}

struct BlockProblem
{
    std::uint8_t active = 0;
    std::uint16_t expanded_set = 1; ///< possible expanded weights
    int dup = -1;                   ///< constrained payload position
    std::uint16_t dup_allowed = 0;  ///< weights allowed at dup
    bool dup_joins_next = false;    ///< dup's weight may become the next expanded weight
    std::uint16_t dup_skip = 0;     ///< values already rejected by a later block
};

std::vector<int> weights_in(std::uint16_t set)
{
    std::vector<int> w;
    for(int v = 0; v <= 8; ++v)
        if((set >> v) & 1u)
            w.push_back(v);
    return w;
}

std::vector<int> dup_order(std::uint16_t allowed, std::uint16_t expanded_set);

/// True when some weight at byte 7 plus three fixed magnitudes decode every
/// possible expanded weight in the set.
bool expanded_set_workable(std::uint16_t set)
{
    static const std::array<bool, 512> table = []
    {
        std::array<bool, 512> t{};
        for(unsigned s = 1; s < 512; ++s)
        {
            const auto ws = weights_in(static_cast<std::uint16_t>(s));
            if(ws.size() == 1)
            {
                t[s] = true;
                continue;
            }
            for(int x = 0; x <= 8 && !t[s]; ++x)
                for(const auto& list : lists_of(3))
                {
                    bool ok = true;
                    std::vector<int> mags(list);
                    mags.push_back(0);
                    for(int w : ws)
                    {
                        mags.back() = x > w ? x - w : w - x;
                        ok = ok && decodable(mags);
                    }
                    if(ok)
                    {
                        t[s] = true;
                        break;
                    }
                }
        }
        return t;
    }();
    return table[set & 0x1FFu];
}

/// Order of trial values for the colliding position. When the block's l is
/// ambiguous the value joins the next block's expanded set, so values that
/// keep that set decodable come first, same parity before the rest.
std::vector<int> dup_order(std::uint16_t allowed, std::uint16_t expanded_set, bool joins_next)
{
    std::vector<int> out;
    for(int v : dup_order(allowed, expanded_set))
        if(!joins_next || expanded_set_workable(static_cast<std::uint16_t>(expanded_set | (1u << v))))
            out.push_back(v);
    for(int v : dup_order(allowed, expanded_set))
        if(std::find(out.begin(), out.end(), v) == out.end())
            out.push_back(v);
    return out;
}

std::vector<int> dup_order(std::uint16_t allowed, std::uint16_t expanded_set)
{
    const auto ws = weights_in(expanded_set);
    const int parity = ws.empty() ? 0 : ws.front() & 1;
    bool single_parity = std::all_of(ws.begin(), ws.end(), [parity](int w) { return (w & 1) == parity; });
    std::vector<int> out;
    for(int pass = 0; pass < 2; ++pass)
        for(int v = 0; v <= 8; ++v)
        {
            if(!((allowed >> v) & 1u))
                continue;
            const bool same = (v & 1) == parity;
            if((pass == 0) == (same || !single_parity))
                out.push_back(v);
        }
    return out;
}

bool try_solve(const BlockProblem& pb, SwapBlockPlan& out)
{
    const auto ws = weights_in(pb.expanded_set);
    if(ws.empty())
        return false;
    const bool pair7 = (pb.active >> 7) & 1u;
    if(!pair7 && ws.size() != 1)
        return false;

    std::vector<int> pairs; // active pairs other than 7
    for(int i = 0; i < 7; ++i)
        if((pb.active >> i) & 1u)
            pairs.push_back(i);

    const int dup_pair = pb.dup < 0 ? -1 : pb.dup % 8;
    std::vector<int> dup_values = pb.dup < 0 ? std::vector<int>{-1} : dup_order(pb.dup_allowed, pb.expanded_set, pb.dup_joins_next);

    for(int v : dup_values)
    {
        if(v >= 0 && ((pb.dup_skip >> v) & 1u))
            continue;
        // weight of payload byte 7
        std::vector<int> xs;
        if(pb.dup == 7)
            xs = {v};
        else if(!pair7)
            xs = {ws.front()};
        else
            for(int x = 0; x <= 8; ++x)
                xs.push_back(x);

        for(int x : xs)
        {
            if(!pair7 && x != ws.front())
                continue;
            for(const auto& list : lists_of(pairs.size()))
            {
                std::vector<int> perm(list);
                std::sort(perm.begin(), perm.end());
                do
                {
                    // every possible expanded weight must leave the sums decodable
                    bool ok = true;
                    if(pair7)
                    {
                        std::vector<int> mags(perm);
                        mags.push_back(0);
                        for(int w : ws)
                        {
                            mags.back() = x - w < 0 ? w - x : x - w;
                            if(!decodable(mags))
                            {
                                ok = false;
                                break;
                            }
                        }
                    }
                    if(!ok)
                        continue;

                    SwapBlockPlan plan;
                    plan.active = pb.active;
                    plan.expanded_set = pb.expanded_set;
                    plan.weights[7] = static_cast<std::int8_t>(x);
                    bool feasible = true;
                    for(int i = 0; i < 7 && feasible; ++i)
                    {
                        const bool act = (pb.active >> i) & 1u;
                        int mag = 0;
                        if(act)
                            mag = perm[static_cast<std::size_t>(std::find(pairs.begin(), pairs.end(), i) - pairs.begin())];
                        if(dup_pair == i)
                        {
                            const int other = pb.dup == i ? i + 8 : i;
                            int partner = v;
                            if(act)
                                partner = v - mag >= 0 ? v - mag : v + mag;
                            if(partner < 0 || partner > 8)
                                feasible = false;
                            plan.weights[static_cast<std::size_t>(pb.dup)] = static_cast<std::int8_t>(v);
                            plan.weights[static_cast<std::size_t>(other)] = static_cast<std::int8_t>(partner);
                        }
                        else
                        {
                            plan.weights[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(mag);
                            plan.weights[static_cast<std::size_t>(i + 8)] = 0;
                        }
                    }
                    if(!feasible)
                        continue;
                    if(pb.dup >= 0)
                        plan.dup_weight = static_cast<std::int8_t>(v);
                    out = plan;
                    return true;
                } while(std::next_permutation(perm.begin(), perm.end()));
            }
        }
    }
    return false;
}

std::vector<std::uint8_t> active_sets_build(bool need7)
{
    std::vector<std::uint8_t> sets;
    if(!need7)
        sets.push_back(kStandardSet);
    for(unsigned s = 0; s < 256; ++s)
    {
        if(std::popcount(s) != 4 || s == kStandardSet)
            continue;
        if(need7 && !(s & 0x80u))
            continue;
        sets.push_back(static_cast<std::uint8_t>(s));
    }
    return sets;
}

const std::vector<std::uint8_t>& active_sets_a(bool need7)
{
    static const std::vector<std::uint8_t> with7 = active_sets_build(true);
    static const std::vector<std::uint8_t> any = active_sets_build(false);
    return need7 ? with7 : any;
}

Differential build_differential(const std::vector<SwapBlockPlan>& blocks)
{
    Bytes bytes(blocks.size() * kPlainBlockSize);
    for(std::size_t k = 0; k < blocks.size(); ++k)
        for(std::size_t p = 0; p < kPlainBlockSize; ++p)
            bytes[k * kPlainBlockSize + p] = canonical_byte(blocks[k].weights[p]);
    return Differential(std::move(bytes));
}

std::string to_hex(unsigned v)
{
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string s;
    do
    {
        s.insert(s.begin(), kDigits[v & 15u]);
        v >>= 4;
    } while(v);
    return s;
}

std::uint16_t bit_of(int w) { return static_cast<std::uint16_t>(1u << w); }

} // namespace

SwapPlan plan_swap_stage_a(const ExpansionRecovery& rec)
{
    const std::size_t blocks = rec.num_blocks();
    SwapPlan plan;
    plan.blocks.resize(blocks);

    // An ambiguous block passes its colliding weight on to later blocks, so a
    // dead end is undone by retrying the latest such block with another value.
    std::vector<std::uint16_t> entry_set(blocks, bit_of(0));
    std::vector<std::uint16_t> skip(blocks, 0);
    std::size_t retries = 0;
    constexpr std::size_t kMaxRetries = 4096;

    std::size_t m = 0;
    while(m < blocks)
    {
        const std::uint16_t expanded_set = entry_set[m];
        BlockProblem pb;
        pb.expanded_set = expanded_set;
        if(rec.collision[m] >= 0)
        {
            pb.dup = rec.collision[m];
            pb.dup_allowed = static_cast<std::uint16_t>(~expanded_set & 0x1FFu);
            pb.dup_joins_next = rec.ambiguous(m);
            pb.dup_skip = skip[m];
        }
        const bool need7 = std::popcount(expanded_set) > 1 || pb.dup == 7;

        SwapBlockPlan& bp = plan.blocks[m];
        bp = SwapBlockPlan{};
        bool solved = false;
        if(!need7 && pb.dup < 0)
        {
            // common case: pairs 0..3 with (4,5,6,8), pair 7 balanced
            bp.active = kStandardSet;
            bp.expanded_set = expanded_set;
            for(int i = 0; i < 4; ++i)
                bp.weights[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(kStandardMagnitudes[static_cast<std::size_t>(i)]);
            bp.weights[7] = static_cast<std::int8_t>(std::countr_zero(expanded_set));
            solved = true;
        }
        if(!solved)
            for(std::uint8_t set : active_sets_a(need7))
            {
                pb.active = set;
                if((solved = try_solve(pb, bp)))
                    break;
            }
        if(!solved)
        {
            // walk back through the blocks that fed this expanded set
            std::size_t j = m;
            bool found = false;
            while(j > 0 && std::popcount(entry_set[j]) > 1)
            {
                --j;
                if(rec.ambiguous(j))
                {
                    found = true;
                    break;
                }
            }
            if(!found || ++retries > kMaxRetries)
                throw Error(ErrorKind::UnresolvedExpansion, "no decodable swap pattern for block " + std::to_string(m) +
                                                                " (expanded weight set 0x" + to_hex(expanded_set) + ", " + std::to_string(retries) + " retries)");
            skip[j] = static_cast<std::uint16_t>(skip[j] | bit_of(plan.blocks[j].dup_weight));
            for(std::size_t i = j + 1; i <= m; ++i)
                skip[i] = 0;
            m = j;
            continue;
        }

        // what the next block's expanded byte may weigh
        if(m + 1 < blocks)
        {
            const int u = rec.unique_index(m);
            if(rec.ambiguous(m))
                entry_set[m + 1] = static_cast<std::uint16_t>(expanded_set | bit_of(bp.dup_weight));
            else if(u != 15)
                entry_set[m + 1] = bit_of(bp.weights[static_cast<std::size_t>(u)]);
            else
                entry_set[m + 1] = expanded_set;
        }
        ++m;
    }
    plan.diff = build_differential(plan.blocks);
    return plan;
}

std::vector<std::int8_t> resolve_expansion(const ExpansionRecovery& rec, const SwapPlan& stage_a,
                                           std::span<const int> observed_a)
{
    const std::size_t blocks = rec.num_blocks();
    if(observed_a.size() != blocks || stage_a.blocks.size() != blocks)
        throw Error(ErrorKind::LengthMismatch, "swap plan does not match expansion recovery");
    std::vector<std::int8_t> l(blocks, -1);
    for(std::size_t m = 0; m + 1 < blocks; ++m)
    {
        const int next = observed_a[m + 1];
        const int same = observed_a[m];
        const auto& bp = stage_a.blocks[m];
        if(rec.ambiguous(m))
        {
            if(next == bp.dup_weight && next != same)
                l[m] = rec.dup[m];
            else if(next == same && next != bp.dup_weight)
                l[m] = 15;
            else
                throw Error(ErrorKind::UnresolvedExpansion, "block " + std::to_string(m) + " still ambiguous");
            continue;
        }
        const int u = rec.unique_index(m);
        const int expect = u == 15 ? same : bp.weights[static_cast<std::size_t>(u)];
        if(next != expect)
            throw Error(ErrorKind::InconsistentWeights, "expanded byte of block " + std::to_string(m + 1) +
                                                            " contradicts l = " + std::to_string(u));
        l[m] = static_cast<std::int8_t>(u);
    }
    return l;
}

SwapPlan plan_swap_stage_b(const SwapPlan& stage_a, std::span<const std::int8_t> l)
{
    const std::size_t blocks = stage_a.blocks.size();
    if(l.size() != blocks)
        throw Error(ErrorKind::LengthMismatch, "index list does not match swap plan");
    SwapPlan plan;
    plan.blocks.resize(blocks);
    // the problem only depends on (active pairs, h); most blocks repeat one
    std::map<std::pair<std::uint8_t, int>, std::optional<SwapBlockPlan>> solved;
    int h = 0;
    for(std::size_t m = 0; m < blocks; ++m)
    {
        BlockProblem pb;
        pb.active = static_cast<std::uint8_t>(~stage_a.blocks[m].active);
        pb.expanded_set = bit_of(h);
        auto [it, fresh] = solved.try_emplace({pb.active, h});
        if(fresh)
        {
            SwapBlockPlan bp;
            if(try_solve(pb, bp))
                it->second = bp;
        }
        if(!it->second)
            throw Error(ErrorKind::UnresolvedExpansion, "no decodable swap pattern for block " + std::to_string(m));
        plan.blocks[m] = *it->second;
        if(m + 1 < blocks)
        {
            if(l[m] < 0)
                throw Error(ErrorKind::UnresolvedExpansion, "l(" + std::to_string(m) + ") unknown");
            if(l[m] != 15)
                h = plan.blocks[m].weights[static_cast<std::size_t>(l[m])];
        }
    }
    plan.diff = build_differential(plan.blocks);
    return plan;
}

std::vector<std::uint8_t> decode_swap_stage(const SwapPlan& plan, std::span<const Byte> cipher_diff,
                                            std::span<const int> observed_expanded)
{
    const std::size_t blocks = plan.blocks.size();
    if(cipher_diff.size() != blocks * kCipherBlockSize || observed_expanded.size() != blocks)
        throw Error(ErrorKind::LengthMismatch, "ciphertext differential does not match swap plan");
    std::vector<std::uint8_t> bits(blocks);
    for(std::size_t k = 0; k < blocks; ++k)
    {
        const auto& bp = plan.blocks[k];
        const int w = observed_expanded[k];
        if(!((bp.expanded_set >> w) & 1u))
            throw Error(ErrorKind::InconsistentWeights, "unexpected expanded weight in block " + std::to_string(k));
        std::array<int, 8> delta{};
        for(int i = 0; i < 7; ++i)
            delta[static_cast<std::size_t>(i)] = bp.weights[static_cast<std::size_t>(i)] - bp.weights[static_cast<std::size_t>(i + 8)];
        delta[7] = bp.weights[7] - w;
        for(int i = 0; i < 8; ++i)
            if(!((bp.active >> i) & 1u) && delta[static_cast<std::size_t>(i)] != 0)
                throw Error(ErrorKind::InvalidDeltaSum, "inactive pair " + std::to_string(i) + " unbalanced in block " +
                                                            std::to_string(k));
        auto c = cipher_diff.subspan(k * kCipherBlockSize, kCipherBlockSize);
        const int sum = block_weight(c.first(8)) - block_weight(c.last(8));
        bits[k] = decode_signed_sum(sum, delta, bp.active);
    }
    return bits;
}

} // namespace mcs
