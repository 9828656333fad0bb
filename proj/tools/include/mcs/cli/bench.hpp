#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mcs::cli {

struct BenchRow
{
    std::size_t bytes = 0;
    double encrypt_s = 0; ///< minimum over repeats
    double decrypt_s = 0;
    double attack_s = 0;
};

/// Sizes must be multiples of 15; throws NonDivisibleLength otherwise.
std::vector<BenchRow> run_bench(std::span<const std::size_t> sizes, int repeats, std::uint64_t seed);

struct LinearFit
{
    double slope = 0;     ///< seconds per byte
    double intercept = 0;
    double max_relative_residual = 0;
};

/// Least squares of attack time against size.
LinearFit fit_attack_time(std::span<const BenchRow> rows);

} // namespace mcs::cli
