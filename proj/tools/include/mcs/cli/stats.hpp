#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mcs::cli {

/// Seed of trial `index` derived from a run seed; results do not depend on
/// how trials are spread over threads.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t index) noexcept;

struct Prop1Cell
{
    int alpha = 0;
    int beta = 0;
    double p = 0;
    int n = 0;
    double formula = 0;
    double empirical = 0;
    double sigma = 0; ///< binomial standard deviation of the estimate
};

inline constexpr double kProp1Probabilities[] = {0.25, 0.5, 0.75};
inline constexpr int kProp1Counts[] = {1, 2, 4, 8};

/// Every legal (alpha, beta) x p x n cell.
std::vector<Prop1Cell> prop1_table(std::size_t trials, std::uint64_t seed, unsigned threads = 0);

/// 15/16^5, the bound on a non-unique l per block.
inline constexpr double kAmbiguityBound = 15.0 / (16.0 * 16.0 * 16.0 * 16.0 * 16.0);

struct AmbiguityStats
{
    std::size_t keys = 0;
    std::size_t blocks = 0;
    std::size_t ambiguous = 0;    ///< blocks with more than one l candidate
    std::size_t attacked = 0;     ///< keys with an ambiguity that went through the full attack
    std::size_t attack_failures = 0; ///< of those, attacks that threw or decrypted wrongly
    double rate() const noexcept { return blocks ? static_cast<double>(ambiguous) / static_cast<double>(blocks) : 0.0; }
};

/// Random keys, `blocks_per_key` blocks each, until `blocks` blocks are seen.
AmbiguityStats ambiguity_rate(std::size_t blocks, std::size_t blocks_per_key, std::uint64_t seed, unsigned threads = 0);

/// Model values for the offset ambiguity.
inline constexpr double kStildeModel = 1.0 / 128 + (1.0 - 1.0 / 128) * ((1.0 / 21) * (2.0 / 8) + 4.0 / 21);
inline constexpr double kStildeLowerBound = 1.0 / 128 + (1.0 - 1.0 / 128) * (4.0 / 21);

struct StildeStats
{
    std::size_t keys = 0;       ///< keys counted (full observation)
    std::size_t ambiguous = 0;  ///< of those, halves whose offset is not unique
    std::size_t rejected = 0;   ///< blocks discarded for partial observation
    std::size_t partial_ambiguous = 0; ///< ambiguous among the rejected ones
    double rate() const noexcept { return keys ? static_cast<double>(ambiguous) / static_cast<double>(keys) : 0.0; }
    double sigma(double p) const noexcept;
    /// Rate over every attacked block, full or partial observation.
    double natural_rate() const noexcept;
};

/// One-block attacks on uniformly random keys. x0 is redrawn until the
/// first half shows every shifted amount of its rotation set.
StildeStats stilde_rate(std::size_t keys, std::uint64_t seed, unsigned threads = 0);

} // namespace mcs::cli
