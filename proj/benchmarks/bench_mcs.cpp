#include <benchmark/benchmark.h>

#include <random>

#include "mcs/attack.hpp"

namespace {

mcs::SecretKey bench_key()
{
    mcs::SecretKey k;
    k.alpha1 = 2;
    k.beta1 = 5;
    k.alpha2 = 3;
    k.beta2 = 4;
    k.secret = 20;
    k.x0 = mcs::Fixed129::from_decimal("0.251");
    return k;
}

mcs::Bytes noise(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    mcs::Bytes b(n);
    for(auto& x : b)
        x = static_cast<mcs::Byte>(rng());
    return b;
}

void BM_Prbs(benchmark::State& state)
{
    const auto blocks = static_cast<std::size_t>(state.range(0));
    const auto x0 = bench_key().x0;
    for(auto _ : state)
        benchmark::DoNotOptimize(mcs::generate_prbs(x0, blocks));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Encrypt(benchmark::State& state)
{
    const auto blocks = static_cast<std::size_t>(state.range(0));
    const auto cipher = mcs::Cipher::from_key(bench_key(), blocks);
    const auto p = noise(15 * blocks, 1);
    for(auto _ : state)
        benchmark::DoNotOptimize(cipher.encrypt(p));
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(p.size()));
}

void BM_Decrypt(benchmark::State& state)
{
    const auto blocks = static_cast<std::size_t>(state.range(0));
    const auto cipher = mcs::Cipher::from_key(bench_key(), blocks);
    const auto c = cipher.encrypt(noise(15 * blocks, 2));
    for(auto _ : state)
        benchmark::DoNotOptimize(cipher.decrypt(c));
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(c.size()));
}

// includes the seven oracle encryptions
void BM_Attack(benchmark::State& state)
{
    const auto blocks = static_cast<std::size_t>(state.range(0));
    const auto cipher = mcs::Cipher::from_key(bench_key(), blocks);
    const auto base = noise(15 * blocks, 3);
    for(auto _ : state)
    {
        auto oracle = mcs::make_local_oracle(cipher);
        benchmark::DoNotOptimize(mcs::run_attack(oracle, base));
    }
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(base.size()));
}

void BM_EesDecrypt(benchmark::State& state)
{
    const auto blocks = static_cast<std::size_t>(state.range(0));
    const auto cipher = mcs::Cipher::from_key(bench_key(), blocks);
    auto oracle = mcs::make_local_oracle(cipher);
    const auto ek = mcs::run_attack(oracle, noise(15 * blocks, 4));
    const auto c = cipher.encrypt(noise(15 * blocks, 5));
    for(auto _ : state)
        benchmark::DoNotOptimize(mcs::ees_decrypt(c, ek));
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(c.size()));
}

} // namespace

BENCHMARK(BM_Prbs)->RangeMultiplier(4)->Range(1 << 8, 1 << 14);
BENCHMARK(BM_Encrypt)->RangeMultiplier(4)->Range(1 << 8, 1 << 14);
BENCHMARK(BM_Decrypt)->RangeMultiplier(4)->Range(1 << 8, 1 << 14);
BENCHMARK(BM_Attack)->RangeMultiplier(4)->Range(1 << 8, 1 << 14)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EesDecrypt)->RangeMultiplier(4)->Range(1 << 8, 1 << 14);

BENCHMARK_MAIN();
