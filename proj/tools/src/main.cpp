#include <cstdio>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "mcs/attack.hpp"
#include "mcs/cli/bench.hpp"
#include "mcs/cli/ekey_io.hpp"
#include "mcs/cli/io.hpp"
#include "mcs/cli/keyfile.hpp"
#include "mcs/cli/pgm.hpp"
#include "mcs/cli/process_oracle.hpp"
#include "mcs/cli/stats.hpp"
#include "mcs/keyrecovery.hpp"

using namespace mcs;
using namespace mcs::cli;

namespace {

constexpr int kExitMismatch = 3;
constexpr int kExitGradeFailed = 4;

// diagnostics go to stderr when stdout carries data
std::ostream& report_stream(const std::string& out) { return out == "-" ? std::cerr : std::cout; }

Bytes pad15(Bytes data)
{
    data.resize((data.size() + kPlainBlockSize - 1) / kPlainBlockSize * kPlainBlockSize, 0);
    return data;
}

Bytes require15(Bytes data, bool pad)
{
    if(data.size() % kPlainBlockSize == 0)
        return data;
    if(!pad)
        throw Error(ErrorKind::NonDivisibleLength,
                    "input has " + std::to_string(data.size()) + " bytes, not a multiple of 15 (use --pad)");
    return pad15(std::move(data));
}

/// Cipher stream of a file: the tagged prefix of a PGM, or the raw bytes.
Bytes cipher_stream(const std::string& path, bool pgm)
{
    Bytes data = read_bytes(path);
    if(!pgm)
        return data;
    auto img = parse_pgm(data);
    const auto len = comment_value(img, kCipherBytesTag).value_or(img.pixels.size());
    if(len > img.pixels.size())
        throw Error(ErrorKind::ParseError, "pgm: cipher length tag exceeds pixel count");
    img.pixels.resize(len);
    return img.pixels;
}

struct Common
{
    std::string key_path;
    std::string in = "-";
    std::string out = "-";
    bool pgm = false;
};

int cmd_keygen(std::optional<std::uint64_t> seed, const std::string& out)
{
    const auto s = seed ? *seed : (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}();
    write_key_file(out, generate_key(s));
    return 0;
}

int cmd_encrypt(const Common& c, bool pad)
{
    const SecretKey key = read_key_file(c.key_path);
    Bytes input = read_bytes(c.in);
    if(!c.pgm)
    {
        write_bytes(c.out, encrypt(require15(std::move(input), pad), key));
        return 0;
    }
    const auto img = parse_pgm(input);
    const Bytes cipher = encrypt(require15(img.pixels, pad), key);
    auto out = wrap_stream(cipher, img.width, kCipherBytesTag);
    out.comments.push_back(" " + std::string(kPlainBytesTag) + "=" + std::to_string(img.pixels.size()));
    write_bytes(c.out, emit_pgm(out));
    return 0;
}

int cmd_decrypt(const Common& c, std::optional<std::size_t> trim)
{
    const SecretKey key = read_key_file(c.key_path);
    Bytes input = read_bytes(c.in);
    if(!c.pgm)
    {
        Bytes plain = decrypt(input, key);
        if(trim)
            plain.resize(std::min(*trim, plain.size()));
        write_bytes(c.out, plain);
        return 0;
    }
    auto img = parse_pgm(input);
    const auto len = comment_value(img, kCipherBytesTag).value_or(img.pixels.size());
    if(len > img.pixels.size())
        throw Error(ErrorKind::ParseError, "pgm: cipher length tag exceeds pixel count");
    Bytes plain = decrypt(std::span<const Byte>(img.pixels).first(len), key);
    const auto keep = trim ? trim : comment_value(img, kPlainBytesTag);
    if(keep)
        plain.resize(std::min(*keep, plain.size()));
    PgmImage out;
    if(plain.size() % img.width == 0 && !plain.empty())
    {
        out.width = img.width;
        out.height = plain.size() / img.width;
        out.pixels = std::move(plain);
    }
    else
        out = wrap_stream(plain, img.width, kPlainBytesTag);
    write_bytes(c.out, emit_pgm(out));
    return 0;
}

struct AttackArgs
{
    std::string key_path;
    std::string oracle_cmd;
    std::string base_path;
    std::size_t blocks = 1024;
    std::uint64_t seed = 1;
    bool pgm = false;
    std::string out;
    std::string verify;
    std::string expect;
};

int cmd_attack(const AttackArgs& a)
{
    Bytes base;
    if(!a.base_path.empty())
    {
        base = read_bytes(a.base_path);
        if(a.pgm)
            base = parse_pgm(base).pixels;
        base = pad15(std::move(base));
    }
    else
    {
        std::mt19937_64 rng(a.seed);
        base.resize(a.blocks * kPlainBlockSize);
        for(auto& b : base)
            b = static_cast<Byte>(rng());
    }
    if(base.empty())
        throw Error(ErrorKind::DomainError, "base plaintext is empty");

    std::optional<SecretKey> key;
    if(!a.key_path.empty())
        key = read_key_file(a.key_path);
    EncryptionOracle oracle = key ? make_local_oracle(*key, base.size() / kPlainBlockSize) : make_process_oracle(a.oracle_cmd);

    AttackDiagnostics diag;
    const EquivalentKey ek = run_attack(oracle, base, &diag);
    write_equivalent_key(a.out, ek);

    auto& os = report_stream(a.out);
    os << "blocks: " << ek.num_blocks() << '\n'
       << "queries: " << diag.queries << '\n'
       << "ambiguous l blocks: " << diag.ambiguous_blocks << '\n'
       << "exempt-row blocks: " << diag.exempt_blocks << '\n';
    for(const auto& [stage, secs] : diag.stage_seconds)
        os << "  stage " << std::left << std::setw(12) << stage << std::fixed << std::setprecision(4) << secs << " s\n";
    os.unsetf(std::ios::floatfield);

    if(a.verify.empty())
        return 0;
    const Bytes c = cipher_stream(a.verify, a.pgm);
    const Bytes got = ees_decrypt(c, ek);
    Bytes want;
    if(!a.expect.empty())
    {
        want = read_bytes(a.expect);
        if(a.pgm)
            want = parse_pgm(want).pixels;
    }
    else if(key)
        want = decrypt(c, *key);
    else
        throw Error(ErrorKind::DomainError, "--verify needs --expect when the oracle is a command");

    std::size_t differ = 0;
    const std::size_t n = std::min(want.size(), got.size());
    for(std::size_t i = 0; i < n; ++i)
        differ += got[i] != want[i] ? 1 : 0;
    differ += want.size() - n;
    if(differ == 0)
    {
        os << "verify: match (" << want.size() << " bytes)\n";
        return 0;
    }
    os << "verify: MISMATCH (" << differ << " of " << want.size() << " bytes differ)\n";
    return kExitMismatch;
}

std::string candidates_text(const std::vector<AlphaBeta>& c)
{
    if(c.empty())
        return "none (not a legal rotation set)";
    std::string s;
    for(const auto& ab : c)
        s += "(" + std::to_string(ab.alpha) + "," + std::to_string(ab.beta) + ") ";
    s.pop_back();
    return s;
}

char state_char(const BlockRecovery& b, int t)
{
    switch(b.state[static_cast<std::size_t>(t)])
    {
    case BitState::Zero: return '0';
    case BitState::One: return '1';
    case BitState::Constrained: return 'c';
    case BitState::Unknown: break;
    }
    return '.';
}

int cmd_recover(const std::string& ek_path, const std::string& key_path, std::size_t show)
{
    const EquivalentKey ek = read_equivalent_key(ek_path);
    const RecoveryReport rep = recover_subkeys(ek);

    std::size_t known = 0, constrained = 0, unique = 0;
    for(const auto& b : rep.blocks)
    {
        for(int t = 0; t < static_cast<int>(kBitsPerBlock); ++t)
        {
            known += b.known(t) ? 1 : 0;
            constrained += b.state[static_cast<std::size_t>(t)] == BitState::Constrained ? 1 : 0;
        }
        unique += (b.offset[0].unique() ? 1 : 0) + (b.offset[1].unique() ? 1 : 0);
    }
    std::cout << "blocks: " << ek.num_blocks() << '\n'
              << "R1 = " << rep.r1.to_string() << "  candidates: " << candidates_text(rep.candidates1) << '\n'
              << "R2 = " << rep.r2.to_string() << "  candidates: " << candidates_text(rep.candidates2) << '\n'
              << "unique offsets: " << unique << " of " << 2 * ek.num_blocks() << '\n'
              << "bits known: " << known << " of " << kBitsPerBlock * ek.num_blocks() << '\n'
              << "bits in constrained pairs: " << constrained << '\n';
    for(std::size_t k = 0; k < std::min(show, rep.blocks.size()); ++k)
    {
        std::string line;
        for(int t = 0; t < static_cast<int>(kBitsPerBlock); ++t)
            line += state_char(rep.blocks[k], t);
        std::cout << "block " << k << ": " << line << '\n';
    }
    if(key_path.empty())
        return 0;

    const SecretKey key = read_key_file(key_path);
    const auto truth = generate_prbs(key.x0, ek.num_blocks());
    const auto g = grade_report(rep, truth);
    const bool r_ok = (rep.r1 == RotationSet::of(key.alpha1, key.beta1)) && (rep.r2 == RotationSet::of(key.alpha2, key.beta2));
    std::cout << "grade: true R1 = " << RotationSet::of(key.alpha1, key.beta1).to_string()
              << ", true R2 = " << RotationSet::of(key.alpha2, key.beta2).to_string() << (r_ok ? " (match)" : " (differ)") << '\n'
              << "grade: assigned bits " << g.assigned << ", wrong " << g.wrong << '\n'
              << "grade: constrained pairs " << g.constrained_pairs << ", missing truth " << g.constrained_wrong << '\n'
              << "grade: masking blocks " << g.masking_blocks << ", unique offsets " << g.unique_offsets << "/" << g.offsets_total << '\n';
    const bool ok = g.wrong == 0 && g.constrained_wrong == 0;
    std::cout << "grade: " << (ok ? "sound" : "UNSOUND") << '\n';
    return ok ? 0 : kExitGradeFailed;
}

int cmd_stats_prop1(std::size_t trials, std::uint64_t seed, unsigned threads)
{
    const auto cells = prop1_table(trials, seed, threads);
    std::cout << "alpha beta    p  n      formula    empirical   z\n";
    std::size_t outside = 0;
    for(const auto& c : cells)
    {
        const double z = c.sigma > 0 ? (c.empirical - c.formula) / c.sigma : (c.empirical == c.formula ? 0.0 : INFINITY);
        outside += std::abs(z) > 3 ? 1 : 0;
        std::printf("%5d %4d %4.2f %2d  %11.6f  %11.6f  %+6.2f\n", c.alpha, c.beta, c.p, c.n, c.formula, c.empirical, z);
    }
    std::printf("cells: %zu, beyond 3 sigma: %zu\n", cells.size(), outside);
    return 0;
}

int cmd_stats_ambiguity(std::size_t blocks, std::size_t per_key, std::uint64_t seed, unsigned threads)
{
    const auto s = ambiguity_rate(blocks, per_key, seed, threads);
    std::printf("keys: %zu, blocks: %zu\n", s.keys, s.blocks);
    std::printf("ambiguous l blocks: %zu, rate %.4e\n", s.ambiguous, s.rate());
    std::printf("bound 15/16^5: %.4e\n", kAmbiguityBound);
    std::printf("keys attacked with an ambiguity: %zu, failures: %zu\n", s.attacked, s.attack_failures);
    return 0;
}

int cmd_stats_stilde(std::size_t trials, std::uint64_t seed, unsigned threads)
{
    const auto s = stilde_rate(trials, seed, threads);
    const double rate = s.rate();
    std::printf("keys (full observation): %zu, non-unique offset: %zu, rate %.4f\n", s.keys, s.ambiguous, rate);
    std::printf("model value %.4f, z = %+.2f\n", kStildeModel, (rate - kStildeModel) / s.sigma(kStildeModel));
    std::printf("lower bound %.4f (reported only)\n", kStildeLowerBound);
    std::printf("partial observations discarded: %zu, rate over all blocks %.4f\n", s.rejected, s.natural_rate());
    return 0;
}

int cmd_bench(const std::vector<std::size_t>& sizes, int repeats, std::uint64_t seed)
{
    const auto rows = run_bench(sizes, repeats, seed);
    std::cout << "     bytes   encrypt_s   decrypt_s    attack_s  attack/encrypt\n";
    for(const auto& r : rows)
        std::printf("%10zu  %10.5f  %10.5f  %10.5f  %14.2f\n", r.bytes, r.encrypt_s, r.decrypt_s, r.attack_s,
                    r.encrypt_s > 0 ? r.attack_s / r.encrypt_s : 0.0);
    for(std::size_t i = 1; i < rows.size(); ++i)
        std::printf("attack ratio %zu -> %zu: %.3f\n", rows[i - 1].bytes, rows[i].bytes, rows[i].attack_s / rows[i - 1].attack_s);
    if(rows.size() >= 2)
    {
        const auto fit = fit_attack_time(rows);
        std::printf("linear fit: %.3e s/byte + %.3e s, max relative residual %.3f\n", fit.slope, fit.intercept,
                    fit.max_relative_residual);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"MCS cipher and its differential chosen-plaintext attack"};
    app.require_subcommand(1);

    std::optional<std::uint64_t> keygen_seed;
    std::string keygen_out = "-";
    auto* keygen = app.add_subcommand("keygen", "write a random legal key");
    keygen->add_option("--seed", keygen_seed, "deterministic seed");
    keygen->add_option("-o,--out", keygen_out, "key file (default stdout)");

    Common enc, dec;
    bool pad = false;
    std::optional<std::size_t> trim;
    auto* encrypt_cmd = app.add_subcommand("encrypt", "encrypt a raw file or a PGM image");
    encrypt_cmd->add_option("-k,--key", enc.key_path, "key file")->required();
    encrypt_cmd->add_option("input", enc.in, "plaintext ('-' for stdin)");
    encrypt_cmd->add_option("output", enc.out, "ciphertext ('-' for stdout)");
    encrypt_cmd->add_flag("--pad", pad, "zero pad to a multiple of 15 bytes");
    encrypt_cmd->add_flag("--pgm", enc.pgm, "input and output are P5 images");

    auto* decrypt_cmd = app.add_subcommand("decrypt", "decrypt a raw file or a PGM image");
    decrypt_cmd->add_option("-k,--key", dec.key_path, "key file")->required();
    decrypt_cmd->add_option("input", dec.in, "ciphertext ('-' for stdin)");
    decrypt_cmd->add_option("output", dec.out, "plaintext ('-' for stdout)");
    decrypt_cmd->add_option("--trim", trim, "cut the plaintext to this many bytes");
    decrypt_cmd->add_flag("--pgm", dec.pgm, "input and output are P5 images");

    AttackArgs atk;
    auto* attack_cmd = app.add_subcommand("attack", "recover an equivalent key with seven chosen plaintexts");
    auto* key_opt = attack_cmd->add_option("-k,--key", atk.key_path, "key of a local oracle");
    auto* cmd_opt = attack_cmd->add_option("--oracle-cmd", atk.oracle_cmd, "shell command: plaintext on stdin, ciphertext on stdout");
    key_opt->excludes(cmd_opt);
    attack_cmd->add_option("--base", atk.base_path, "base plaintext (zero padded to 15)");
    attack_cmd->add_option("--blocks", atk.blocks, "random base plaintext length in blocks")->check(CLI::PositiveNumber);
    attack_cmd->add_option("--seed", atk.seed, "seed of the random base plaintext");
    attack_cmd->add_flag("--pgm", atk.pgm, "base, verify and expect files are P5 images");
    attack_cmd->add_option("-o,--out", atk.out, "equivalent key file")->required();
    attack_cmd->add_option("--verify", atk.verify, "ciphertext to decrypt with the equivalent key");
    attack_cmd->add_option("--expect", atk.expect, "plaintext the verify ciphertext must decrypt to");

    std::string ek_path, grade_key;
    std::size_t show_blocks = 0;
    auto* recover_cmd = app.add_subcommand("recover-subkeys", "sub-keys and controlling bits from an equivalent key");
    recover_cmd->add_option("ekey", ek_path, "equivalent key file")->required();
    recover_cmd->add_option("-k,--key", grade_key, "true key, for grading");
    recover_cmd->add_option("--show-blocks", show_blocks, "print per-bit status of the first N blocks");

    std::size_t trials = 100000, stat_blocks = 2000000, per_key = 1024;
    std::uint64_t stat_seed = 1;
    unsigned threads = 0;
    auto* stats_cmd = app.add_subcommand("stats", "statistical checks");
    stats_cmd->require_subcommand(1);
    auto add_common = [&](CLI::App* s)
    {
        s->add_option("--seed", stat_seed, "run seed");
        s->add_option("--threads", threads, "worker threads (0 = all cores)");
    };
    auto* prop1_cmd = stats_cmd->add_subcommand("prop1", "rotation-set miss probability: formula vs simulation");
    prop1_cmd->add_option("--trials", trials, "trials per cell")->check(CLI::PositiveNumber);
    add_common(prop1_cmd);
    auto* amb_cmd = stats_cmd->add_subcommand("ambiguity", "rate of blocks with a non-unique l");
    amb_cmd->add_option("--blocks", stat_blocks, "blocks to simulate")->check(CLI::PositiveNumber);
    amb_cmd->add_option("--blocks-per-key", per_key, "blocks per random key")->check(CLI::PositiveNumber);
    add_common(amb_cmd);
    auto* stilde_cmd = stats_cmd->add_subcommand("stilde", "rate of non-unique row offsets");
    stilde_cmd->add_option("--trials", trials, "keys")->check(CLI::PositiveNumber);
    add_common(stilde_cmd);

    std::vector<std::string> size_args;
    int repeats = 3;
    std::uint64_t bench_seed = 1;
    auto* bench_cmd = app.add_subcommand("bench", "encrypt, decrypt and attack timings");
    bench_cmd->add_option("--sizes", size_args, "plaintext sizes in bytes (multiples of 15)")->delimiter(',');
    bench_cmd->add_option("--repeats", repeats, "repeats per size (minimum is kept)")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--seed", bench_seed, "seed");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if(keygen->parsed())
            return cmd_keygen(keygen_seed, keygen_out);
        if(encrypt_cmd->parsed())
            return cmd_encrypt(enc, pad);
        if(decrypt_cmd->parsed())
            return cmd_decrypt(dec, trim);
        if(attack_cmd->parsed())
        {
            if(atk.key_path.empty() && atk.oracle_cmd.empty())
                throw Error(ErrorKind::DomainError, "attack needs --key or --oracle-cmd");
            return cmd_attack(atk);
        }
        if(recover_cmd->parsed())
            return cmd_recover(ek_path, grade_key, show_blocks);
        if(prop1_cmd->parsed())
            return cmd_stats_prop1(trials, stat_seed, threads);
        if(amb_cmd->parsed())
            return cmd_stats_ambiguity(stat_blocks, per_key, stat_seed, threads);
        if(stilde_cmd->parsed())
            return cmd_stats_stilde(trials, stat_seed, threads);
        if(bench_cmd->parsed())
        {
            std::vector<std::size_t> sizes;
            for(const auto& a : size_args)
                if(!a.empty())
                    sizes.push_back(std::stoull(a));
            return cmd_bench(sizes, repeats, bench_seed);
        }
    }
    catch(const std::exception& e)
    {
        std::cerr << "mcs: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
