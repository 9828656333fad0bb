#include <doctest.h>

#include <filesystem>
#include <random>
#include <set>

#include <unistd.h>

#include "mcs/cli/bench.hpp"
#include "mcs/cli/ekey_io.hpp"
#include "mcs/cli/io.hpp"
#include "mcs/cli/keyfile.hpp"
#include "mcs/cli/pgm.hpp"
#include "mcs/cli/process_oracle.hpp"
#include "mcs/cli/stats.hpp"
#include "support.hpp"

using namespace mcs;

namespace {

ErrorKind kind_of(auto&& fn)
{
    try
    {
        fn();
    }
    catch(const Error& e)
    {
        return e.kind();
    }
    return ErrorKind::AttackFailed; // nothing thrown
}

struct ScratchDir
{
    std::filesystem::path path;
    ScratchDir() : path(std::filesystem::temp_directory_path() / ("mcs-test-io-" + std::to_string(::getpid())))
    {
        std::filesystem::create_directories(path);
    }
    ~ScratchDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

std::filesystem::path scratch(const std::string& name)
{
    static const ScratchDir d;
    return d.path / name;
}

} // namespace

TEST_CASE("key files")
{
    const auto key = test::reference_key();
    const auto text = cli::emit_key(key);
    CHECK(text.find("x0=00000000000000000404189374bc6a7f0") != std::string::npos);
    CHECK(cli::parse_key(text) == key);

    const auto parsed = cli::parse_key("# reference\nalpha1=2\nbeta1=5\n\nalpha2 = 3\nbeta2=4\nsecret=20\nx0=0.251\n");
    CHECK(parsed == key);

    CHECK(kind_of([] { cli::parse_key("alpha1=2\n"); }) == ErrorKind::ParseError);
    CHECK(kind_of([] { cli::parse_key("alpha1=2\nalpha1=2\n"); }) == ErrorKind::ParseError);
    CHECK(kind_of([] { cli::parse_key("gamma=2\n"); }) == ErrorKind::ParseError);
    CHECK(kind_of([] { cli::parse_key("alpha1 2\n"); }) == ErrorKind::ParseError);
    CHECK(kind_of([] { cli::parse_key("alpha1=x\nbeta1=1\nalpha2=1\nbeta2=1\nsecret=0\nx0=0\n"); }) ==
          ErrorKind::ParseError);
    CHECK(kind_of([] { cli::parse_key("alpha1=4\nbeta1=4\nalpha2=1\nbeta2=1\nsecret=0\nx0=0\n"); }) ==
          ErrorKind::InvalidKey);
    CHECK(kind_of([] { cli::parse_key("alpha1=1\nbeta1=1\nalpha2=1\nbeta2=1\nsecret=256\nx0=0\n"); }) ==
          ErrorKind::InvalidKey);

    CHECK(cli::generate_key(5) == cli::generate_key(5));
    CHECK_FALSE(cli::generate_key(5) == cli::generate_key(6));
    std::mt19937_64 rng(51);
    std::set<std::pair<int, int>> seen;
    for(int i = 0; i < 10000; ++i)
    {
        const auto k = cli::random_key(rng);
        REQUIRE_NOTHROW(k.validate());
        seen.insert({k.alpha1, k.beta1});
        seen.insert({k.alpha2, k.beta2});
        if(i < 200)
            CHECK(cli::parse_key(cli::emit_key(k)) == k);
    }
    CHECK(seen.size() == 21);

    const auto path = scratch("k.key");
    cli::write_key_file(path, key);
    CHECK(cli::read_key_file(path) == key);
    CHECK(kind_of([] { cli::read_key_file(scratch("missing.key")); }) == ErrorKind::IoError);
}

TEST_CASE("greymap files")
{
    cli::PgmImage img{3, 2, {1, 2, 3, 4, 5, 6}, {" made by hand"}};
    const auto file = cli::emit_pgm(img);
    CHECK(std::string(file.begin(), file.begin() + 3) == "P5\n");
    CHECK(cli::parse_pgm(file) == img);

    const std::string plain = "P5 2 2 255\n";
    Bytes raw(plain.begin(), plain.end());
    for(Byte b : {9, 8, 7, 6})
        raw.push_back(b);
    const auto p = cli::parse_pgm(raw);
    CHECK(p.width == 2);
    CHECK(p.height == 2);
    CHECK(p.pixels == Bytes{9, 8, 7, 6});

    auto bad = [](const std::string& s) {
        Bytes b(s.begin(), s.end());
        return kind_of([&] { cli::parse_pgm(b); });
    };
    CHECK(bad("P2 2 2 255\n1234") == ErrorKind::ParseError);
    CHECK(bad("P5 2 2 65535\n12345678") == ErrorKind::ParseError);
    CHECK(bad("P5 2 2 255\n123") == ErrorKind::ParseError);
    CHECK(bad("P5 2 2 255\n12345") == ErrorKind::ParseError);
    CHECK(bad("P5 2") == ErrorKind::ParseError);

    const Bytes stream{1, 2, 3, 4, 5};
    const auto w = cli::wrap_stream(stream, 2, cli::kCipherBytesTag);
    CHECK(w.width == 2);
    CHECK(w.height == 3);
    CHECK(w.pixels == Bytes{1, 2, 3, 4, 5, 0});
    CHECK(cli::comment_value(w, cli::kCipherBytesTag) == 5u);
    CHECK_FALSE(cli::comment_value(w, cli::kPlainBytesTag).has_value());
    CHECK(cli::comment_value(cli::parse_pgm(cli::emit_pgm(w)), cli::kCipherBytesTag) == 5u);
}

TEST_CASE("equivalent key files")
{
    std::mt19937_64 rng(52);
    const std::size_t B = 24;
    auto oracle = make_local_oracle(test::reference_key(), B);
    const auto ek = run_attack(oracle, test::random_bytes(rng, 15 * B));
    const auto bytes = cli::serialize_equivalent_key(ek);
    CHECK(bytes.size() == 4 + 1 + 4 + B * (2 + cli::kEquivalentRecordSize));
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "MCSE");
    CHECK(cli::deserialize_equivalent_key(bytes) == ek);

    const auto path = scratch("k.ek");
    cli::write_equivalent_key(path, ek);
    CHECK(cli::read_equivalent_key(path) == ek);

    auto corrupt = [&](auto&& edit) {
        Bytes b = bytes;
        edit(b);
        return kind_of([&] { cli::deserialize_equivalent_key(b); });
    };
    CHECK(corrupt([](Bytes& b) { b[0] = 'X'; }) == ErrorKind::ParseError);
    CHECK(corrupt([](Bytes& b) { b[4] = 9; }) == ErrorKind::ParseError);
    CHECK(corrupt([](Bytes& b) { b.pop_back(); }) == ErrorKind::ParseError);
    CHECK(corrupt([](Bytes& b) { b.push_back(0); }) == ErrorKind::ParseError);
    CHECK(corrupt([](Bytes& b) { b[5] = 0xFF; }) == ErrorKind::ParseError);
    // swap amount out of range in the first record
    CHECK(corrupt([](Bytes& b) { b[9 + 2 + 2 + 16 + 16 + 16] = 9; }) == ErrorKind::ParseError);
    CHECK(corrupt([](Bytes& b) { b.resize(3); }) == ErrorKind::ParseError);
}

TEST_CASE("process oracle")
{
    // `false` exits nonzero
    auto failing = cli::make_process_oracle("false");
    CHECK(kind_of([&] { failing(Bytes(15)); }) == ErrorKind::IoError);
    // `cat` echoes and breaks the length contract
    auto echo = cli::make_process_oracle("cat");
    CHECK(kind_of([&] { echo(Bytes(15)); }) == ErrorKind::LengthMismatch);
}

TEST_CASE("statistics helpers")
{
    CHECK(cli::trial_seed(1, 0) == cli::trial_seed(1, 0));
    CHECK(cli::trial_seed(1, 0) != cli::trial_seed(1, 1));
    CHECK(cli::trial_seed(1, 0) != cli::trial_seed(2, 0));
    CHECK(cli::kAmbiguityBound == doctest::Approx(1.4305e-5).epsilon(1e-4));
    CHECK(cli::kStildeModel == doctest::Approx(0.2086).epsilon(1e-3));
    CHECK(cli::kStildeLowerBound == doctest::Approx(0.1968).epsilon(1e-3));

    const auto t1 = cli::prop1_table(500, 3, 1);
    const auto t4 = cli::prop1_table(500, 3, 4);
    REQUIRE(t1.size() == 21 * 3 * 4);
    for(std::size_t i = 0; i < t1.size(); ++i)
        CHECK(t1[i].empirical == t4[i].empirical);

    const auto a = cli::ambiguity_rate(3000, 300, 4, 2);
    CHECK(a.blocks == 3000);
    CHECK(a.keys == 10);
    CHECK(a.attack_failures == 0);

    const auto s = cli::stilde_rate(200, 5, 2);
    CHECK(s.keys == 200);
    CHECK(s.ambiguous <= s.keys);
}

TEST_CASE("timing table")
{
    const std::size_t sizes[] = {150, 300};
    const auto rows = cli::run_bench(sizes, 1, 1);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].bytes == 300);
    CHECK(rows[0].attack_s > 0);
    const std::size_t odd[] = {16};
    CHECK(kind_of([&] { cli::run_bench(odd, 1, 1); }) == ErrorKind::NonDivisibleLength);
    CHECK(cli::run_bench(std::span<const std::size_t>{}, 1, 1).empty());

    std::vector<cli::BenchRow> exact{{100, 0, 0, 1.0}, {200, 0, 0, 2.0}, {400, 0, 0, 4.0}};
    const auto fit = cli::fit_attack_time(exact);
    CHECK(fit.slope == doctest::Approx(0.01));
    CHECK(fit.intercept == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(fit.max_relative_residual < 1e-9);
}
