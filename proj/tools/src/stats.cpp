#include "mcs/cli/stats.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "mcs/attack.hpp"
#include "mcs/cli/keyfile.hpp"
#include "mcs/keyrecovery.hpp"

namespace mcs::cli {

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t index) noexcept
{
    // splitmix64 over (seed, index)
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

namespace {

unsigned thread_count(unsigned requested, std::size_t work)
{
    unsigned t = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(t, std::max<std::size_t>(work, 1)));
}

/// Runs fn(i) for i in [0, n); each index is visited by exactly one thread.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn)
{
    threads = thread_count(threads, n);
    if(threads == 1)
    {
        for(std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::exception_ptr first;
    std::mutex guard;
    {
        std::vector<std::jthread> pool;
        for(unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&, t]
            {
                try
                {
                    for(std::size_t i = t; i < n; i += threads)
                        fn(i);
                }
                catch(...)
                {
                    std::lock_guard lock(guard);
                    if(!first)
                        first = std::current_exception();
                }
            });
    }
    if(first)
        std::rethrow_exception(first);
}

Bytes random_bytes(std::mt19937_64& rng, std::size_t n)
{
    Bytes b(n);
    for(auto& x : b)
        x = static_cast<Byte>(rng());
    return b;
}

} // namespace

std::vector<Prop1Cell> prop1_table(std::size_t trials, std::uint64_t seed, unsigned threads)
{
    if(trials == 0)
        throw Error(ErrorKind::DomainError, "trials must be positive");
    std::vector<Prop1Cell> cells;
    for(const auto& ab : legal_alpha_beta())
        for(double p : kProp1Probabilities)
            for(int n : kProp1Counts)
                cells.push_back({ab.alpha, ab.beta, p, n, 0, 0, 0});
    parallel_for(cells.size(), threads, [&](std::size_t i)
    {
        auto& c = cells[i];
        c.formula = prop1_probability(c.alpha, c.beta, c.p, c.n);
        c.empirical = prop1_montecarlo(c.alpha, c.beta, c.p, c.n, trials, trial_seed(seed, i));
        c.sigma = std::sqrt(c.formula * (1 - c.formula) / static_cast<double>(trials));
    });
    return cells;
}

AmbiguityStats ambiguity_rate(std::size_t blocks, std::size_t blocks_per_key, std::uint64_t seed, unsigned threads)
{
    if(blocks_per_key == 0)
        throw Error(ErrorKind::DomainError, "blocks per key must be positive");
    const std::size_t keys = (blocks + blocks_per_key - 1) / blocks_per_key;
    const auto [d1, d2] = gen_expansion_differentials(blocks_per_key);

    struct PerKey
    {
        std::size_t ambiguous = 0;
        bool attacked = false;
        bool failed = false;
    };
    std::vector<PerKey> out(keys);
    parallel_for(keys, threads, [&](std::size_t i)
    {
        std::mt19937_64 rng(trial_seed(seed, i));
        const SecretKey key = random_key(rng);
        const auto cipher = Cipher::from_key(key, blocks_per_key);
        const Bytes base = random_bytes(rng, blocks_per_key * kPlainBlockSize);
        const Bytes c0 = cipher.encrypt(base);
        const Bytes c1 = xor_bytes(cipher.encrypt(d1.apply_to(base)), c0);
        const Bytes c2 = xor_bytes(cipher.encrypt(d2.apply_to(base)), c0);
        const auto rec = recover_expansion_indices(d1, d2, c1, c2);
        auto& r = out[i];
        for(std::size_t k = 0; k < blocks_per_key; ++k)
            r.ambiguous += rec.ambiguous(k) ? 1 : 0;
        if(r.ambiguous == 0)
            return;
        // an ambiguity must not break the attack
        r.attacked = true;
        try
        {
            auto oracle = make_local_oracle(cipher);
            const auto ek = run_attack(oracle, base);
            const Bytes fresh = random_bytes(rng, base.size());
            r.failed = ees_decrypt(cipher.encrypt(fresh), ek) != fresh;
        }
        catch(const Error&)
        {
            r.failed = true;
        }
    });

    AmbiguityStats s;
    s.keys = keys;
    s.blocks = keys * blocks_per_key;
    for(const auto& r : out)
    {
        s.ambiguous += r.ambiguous;
        s.attacked += r.attacked ? 1 : 0;
        s.attack_failures += r.failed ? 1 : 0;
    }
    return s;
}

double StildeStats::sigma(double p) const noexcept
{
    return keys ? std::sqrt(p * (1 - p) / static_cast<double>(keys)) : 0.0;
}

double StildeStats::natural_rate() const noexcept
{
    const auto total = keys + rejected;
    return total ? static_cast<double>(ambiguous + partial_ambiguous) / static_cast<double>(total) : 0.0;
}

StildeStats stilde_rate(std::size_t keys, std::uint64_t seed, unsigned threads)
{
    struct PerKey
    {
        bool ambiguous = false;
        std::size_t rejected = 0;
        std::size_t partial_ambiguous = 0;
    };
    std::vector<PerKey> out(keys);
    parallel_for(keys, threads, [&](std::size_t i)
    {
        std::mt19937_64 rng(trial_seed(seed, i));
        auto& r = out[i];
        // the sub-keys stay uniform; only the stream is redrawn
        SecretKey key = random_key(rng);
        for(;;)
        {
            key.x0 = random_key(rng).x0;
            const auto cipher = Cipher::from_key(key, 1);
            const auto r1 = RotationSet::of(key.alpha1, key.beta1);
            const auto r2 = RotationSet::of(key.alpha2, key.beta2);
            std::uint8_t seen = 0;
            for(int j = 0; j < 8; ++j)
                seen |= static_cast<std::uint8_t>(1u << cipher.control(0).column_amounts[static_cast<std::size_t>(j)]);

            auto oracle = make_local_oracle(cipher);
            const auto ek = run_attack(oracle, random_bytes(rng, kPlainBlockSize));
            const bool amb = !determine_s_offsets(ek, r1, r2)[0][0].unique();
            if(seen == r1.mask)
            {
                r.ambiguous = amb;
                return;
            }
            ++r.rejected;
            r.partial_ambiguous += amb ? 1 : 0;
        }
    });

    StildeStats s;
    s.keys = keys;
    for(const auto& r : out)
    {
        s.ambiguous += r.ambiguous ? 1 : 0;
        s.rejected += r.rejected;
        s.partial_ambiguous += r.partial_ambiguous;
    }
    return s;
}

} // namespace mcs::cli
