#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mcs/attack.hpp"
#include "mcs/prbg.hpp"

namespace mcs {

/// Subset of {1..7}: the possible rotation amounts of one half,
/// {alpha, 8-alpha, alpha+beta, 8-(alpha+beta)} for the true key.
struct RotationSet
{
    std::uint8_t mask = 0; ///< bit v set: v is a member

    static RotationSet of(int alpha, int beta) noexcept;
    static RotationSet from_members(std::initializer_list<int> members) noexcept;

    bool contains(int v) const noexcept { return v >= 0 && v < 8 && ((mask >> v) & 1u); }
    int size() const noexcept;
    std::vector<int> members() const;
    std::string to_string() const;

    friend bool operator==(const RotationSet&, const RotationSet&) = default;
};

struct AlphaBeta
{
    int alpha = 0;
    int beta = 0;
    friend bool operator==(const AlphaBeta&, const AlphaBeta&) = default;
    friend auto operator<=>(const AlphaBeta&, const AlphaBeta&) = default;
};

/// The 21 pairs with 1 <= alpha < alpha+beta <= 7.
std::vector<AlphaBeta> legal_alpha_beta();

/// Union of {r, 8-r} over every observable row amount, per half.
std::pair<RotationSet, RotationSet> recover_rotation_sets(const EquivalentKey& ek);

/// All legal pairs producing exactly R. Throws IllegalSet if there are none.
std::vector<AlphaBeta> candidate_alpha_beta(RotationSet r);

/// Probability that n amounts drawn from pair {alpha, 8-alpha} with
/// probability p (else from {alpha+beta, 8-alpha-beta}) fail to reveal R.
/// Throws DomainError on illegal arguments.
double prop1_probability(int alpha, int beta, double p, int n);
double prop1_montecarlo(int alpha, int beta, double p, int n, std::size_t trials, std::uint64_t seed);

/// Offsets o in 0..7 consistent with the observations.
struct OffsetEstimate
{
    std::uint8_t candidates = 0; ///< bit o set: o possible

    bool unique() const noexcept;
    int value() const noexcept; ///< -1 unless unique
    friend bool operator==(const OffsetEstimate&, const OffsetEstimate&) = default;
};

/// {o : (s - o) mod 8 in R for every observed amount s}. `observed` is a
/// bit mask over 0..7.
OffsetEstimate candidate_offsets(std::uint8_t observed, RotationSet r) noexcept;

std::vector<std::array<OffsetEstimate, 2>> determine_s_offsets(const EquivalentKey& ek, RotationSet r1, RotationSet r2);

enum class BitState : std::uint8_t { Unknown, Zero, One, Constrained };

struct BlockRecovery
{
    /// Status of b(129k + t). A Constrained pair is stored at its first index
    /// t; bit (2*b_t + b_{t+1}) of pair_mask[t] marks an admissible pair and
    /// index t+1 is Constrained too.
    std::array<BitState, kBitsPerBlock> state{};
    std::array<std::uint8_t, kBitsPerBlock> pair_mask{};
    std::array<OffsetEstimate, 2> offset{};
    bool swap_recovered[2] = {false, false};
    bool masking_determined = false;

    void set(int t, bool v) noexcept { state[static_cast<std::size_t>(t)] = v ? BitState::One : BitState::Zero; }
    bool known(int t) const noexcept
    {
        return state[static_cast<std::size_t>(t)] == BitState::Zero || state[static_cast<std::size_t>(t)] == BitState::One;
    }
    bool value(int t) const noexcept { return state[static_cast<std::size_t>(t)] == BitState::One; }
};

/// b(12..35) from the de-offset permutations, per half with a unique offset.
void recover_swap_bits_9to35(const EquivalentBlock& block, BlockRecovery& out);
/// b(36..51) where the mask words can be told apart; needs both offsets unique.
void recover_masking_bits(const EquivalentBlock& block, BlockRecovery& out);
/// Admissible (p, m) pairs for every row and column amount of a half with a unique offset.
void constrain_rotation_bits(const EquivalentBlock& block, const std::vector<AlphaBeta>& cand1,
                             const std::vector<AlphaBeta>& cand2, BlockRecovery& out);

struct RecoveryReport
{
    RotationSet r1, r2;
    std::vector<AlphaBeta> candidates1, candidates2; ///< empty when R is not a legal set
    std::vector<BlockRecovery> blocks;
};

RecoveryReport recover_subkeys(const EquivalentKey& ek);

struct RecoveryGrade
{
    std::size_t assigned = 0;          ///< bits reported Zero/One
    std::size_t wrong = 0;             ///< of those, differing from the truth
    std::size_t constrained_pairs = 0;
    std::size_t constrained_wrong = 0; ///< pairs whose set misses the truth
    std::size_t unique_offsets = 0;    ///< (block, half) with a unique offset
    std::size_t offsets_total = 0;
    std::size_t masking_blocks = 0;
};

RecoveryGrade grade_report(const RecoveryReport& report, const PrbsStream& truth);

} // namespace mcs
