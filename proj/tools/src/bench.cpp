#include "mcs/cli/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "mcs/attack.hpp"
#include "mcs/cli/keyfile.hpp"

namespace mcs::cli {

namespace {

template <class Fn>
double min_seconds(int repeats, Fn fn)
{
    double best = std::numeric_limits<double>::infinity();
    for(int r = 0; r < std::max(repeats, 1); ++r)
    {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        best = std::min(best, dt.count());
    }
    return best;
}

} // namespace

std::vector<BenchRow> run_bench(std::span<const std::size_t> sizes, int repeats, std::uint64_t seed)
{
    for(auto n : sizes)
        if(n == 0 || n % kPlainBlockSize != 0)
            throw Error(ErrorKind::NonDivisibleLength, "bench size " + std::to_string(n) + " is not a positive multiple of 15");

    std::vector<BenchRow> rows;
    std::mt19937_64 rng(seed);
    const SecretKey key = random_key(rng);
    for(auto n : sizes)
    {
        const auto cipher = Cipher::from_key(key, n / kPlainBlockSize);
        Bytes plain(n);
        for(auto& b : plain)
            b = static_cast<Byte>(rng());
        Bytes c;
        BenchRow row;
        row.bytes = n;
        row.encrypt_s = min_seconds(repeats, [&] { c = cipher.encrypt(plain); });
        row.decrypt_s = min_seconds(repeats, [&] { plain = cipher.decrypt(c); });
        row.attack_s = min_seconds(repeats, [&]
        {
            auto oracle = make_local_oracle(cipher);
            (void)run_attack(oracle, plain);
        });
        rows.push_back(row);
    }
    return rows;
}

LinearFit fit_attack_time(std::span<const BenchRow> rows)
{
    LinearFit fit;
    const double n = static_cast<double>(rows.size());
    if(rows.size() < 2)
        return fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for(const auto& r : rows)
    {
        const double x = static_cast<double>(r.bytes);
        sx += x;
        sy += r.attack_s;
        sxx += x * x;
        sxy += x * r.attack_s;
    }
    const double den = n * sxx - sx * sx;
    if(den == 0)
        return fit;
    fit.slope = (n * sxy - sx * sy) / den;
    fit.intercept = (sy - fit.slope * sx) / n;
    for(const auto& r : rows)
    {
        const double pred = fit.slope * static_cast<double>(r.bytes) + fit.intercept;
        if(r.attack_s > 0)
            fit.max_relative_residual = std::max(fit.max_relative_residual, std::abs(r.attack_s - pred) / r.attack_s);
    }
    return fit;
}

} // namespace mcs::cli
