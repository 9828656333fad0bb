#include "mcs/attack.hpp"

#include <chrono>

namespace mcs {

namespace {

class StageRunner
{
public:
    explicit StageRunner(AttackDiagnostics* diag) : diag_(diag) {}

    template <typename F>
    auto operator()(const char* name, F&& f)
    {
        const auto t0 = std::chrono::steady_clock::now();
        try
        {
            if constexpr(std::is_void_v<decltype(f())>)
            {
                f();
                record(name, t0);
            }
            else
            {
                auto r = f();
                record(name, t0);
                return r;
            }
        }
        catch(const AttackFailed&)
        {
            throw;
        }
        catch(const Error& e)
        {
            throw AttackFailed(name, e.kind(), e.detail());
        }
    }

private:
    void record(const char* name, std::chrono::steady_clock::time_point t0)
    {
        if(diag_)
            diag_->stage_seconds.emplace_back(
                name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }

    AttackDiagnostics* diag_;
};

} // namespace

EquivalentKey run_attack(EncryptionOracle& oracle, std::span<const Byte> base, AttackDiagnostics* diag)
{
    if(base.empty() || base.size() % kPlainBlockSize != 0)
        throw Error(ErrorKind::NonDivisibleLength, "base plaintext must be a non-empty multiple of 15 bytes");
    const std::size_t blocks = base.size() / kPlainBlockSize;
    const std::size_t queries_before = oracle.queries();
    StageRunner stage(diag);

    auto query = [&](const Differential& d)
    {
        Bytes plain = d.apply_to(base);
        return oracle(plain);
    };

    // the base ciphertext doubles as the known plaintext/ciphertext pair
    const Bytes c0 = stage("base", [&] { return oracle(base); });
    auto diff_of = [&](const Bytes& c) { return xor_bytes(c, c0); };

    auto [d1, d2] = gen_expansion_differentials(blocks);
    Bytes cd1, cd2;
    const auto rec = stage("expansion", [&]
    {
        cd1 = diff_of(query(d1));
        cd2 = diff_of(query(d2));
        return recover_expansion_indices(d1, d2, cd1, cd2);
    });

    const SwapPlan plan_a = stage("swap-a-plan", [&] { return plan_swap_stage_a(rec); });
    Bytes cd3;
    std::vector<std::int8_t> l;
    std::vector<std::uint8_t> bits_a;
    stage("swap-a", [&]
    {
        cd3 = diff_of(query(plan_a.diff));
        const auto obs = observed_expanded_weights(plan_a.diff, cd3);
        l = resolve_expansion(rec, plan_a, obs);
        bits_a = decode_swap_stage(plan_a, cd3, obs);
    });

    const SwapPlan plan_b = stage("swap-b-plan", [&] { return plan_swap_stage_b(plan_a, l); });
    Bytes cd4;
    std::vector<std::uint8_t> swap_bits(blocks);
    stage("swap-b", [&]
    {
        cd4 = diff_of(query(plan_b.diff));
        const auto obs = observed_expanded_weights(plan_b.diff, cd4);
        const auto bits_b = decode_swap_stage(plan_b, cd4, obs);
        for(std::size_t k = 0; k < blocks; ++k)
            swap_bits[k] = bits_a[k] | bits_b[k];
    });

    auto [d5, probe] = gen_vertical_differential(blocks, l);
    const auto rot_y = stage("vertical", [&] { return recover_vertical_part(diff_of(query(d5))); });

    auto [d6, zero_expanded] = gen_horizontal_differential(blocks, l);
    const auto horizontal =
        stage("horizontal", [&] { return recover_horizontal_part(diff_of(query(d6)), rot_y, zero_expanded); });

    const auto perm = stage("byteswap", [&]
    {
        const std::array<std::vector<ExpandedBlock16>, 4> xs{expanded_differential(d1, l), expanded_differential(d2, l),
                                                             expanded_differential(plan_a.diff, l),
                                                             expanded_differential(plan_b.diff, l)};
        const std::array<Bytes, 4> cs{cd1, cd2, cd3, cd4};
        return recover_byteswap_part(xs, cs, swap_bits, horizontal.rot_x, rot_y);
    });

    const auto masking = stage("masking", [&]
    { return recover_masking_part(base, c0, l, swap_bits, perm, horizontal.rot_x, rot_y); });

    EquivalentKey ek;
    ek.blocks.resize(blocks);
    std::size_t ambiguous = 0, exempt = 0;
    stage("assemble", [&]
    {
        for(std::size_t k = 0; k < blocks; ++k)
        {
            auto& b = ek.blocks[k];
            b.l = l[k];
            b.swap_bits = swap_bits[k];
            b.perm = perm[k];
            b.seed_star = masking.seed_star[k];
            b.rot_x = horizontal.rot_x[k];
            b.rot_y = rot_y[k];
            b.probe_row = probe[k];
            if(rec.ambiguous(k))
            {
                b.flags |= kFlagAmbiguousL;
                ++ambiguous;
            }
            if(l[k] < 0)
                b.flags |= kFlagLUnknown;
            // b11 set moves the expanded byte into row 7 of the first half
            const std::size_t half = (swap_bits[k] >> 7) & 1u ? 0 : 1;
            const auto expanded_row = static_cast<std::int8_t>(8 * half + perm[k][half][7]);
            if(horizontal.zero_row[k] >= 0)
            {
                if(horizontal.zero_row[k] != expanded_row)
                    throw Error(ErrorKind::AmbiguousMatch,
                                "empty row of block " + std::to_string(k) + " is not the expanded byte's row");
                b.exempt_row = expanded_row;
                b.flags |= kFlagExemptRow;
                ++exempt;
            }
            if(masking.expanded_unknown[k])
                b.flags |= kFlagSeedRowUnknown;
        }
    });

    if(diag)
    {
        diag->queries = oracle.queries() - queries_before;
        diag->ambiguous_blocks = ambiguous;
        diag->exempt_blocks = exempt;
        diag->plan.base.assign(base.begin(), base.end());
        diag->plan.diffs = {d1, d2, plan_a.diff, plan_b.diff, d5, d6};
    }
    return ek;
}

} // namespace mcs
