#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcs/cipher.hpp"
#include "mcs/core.hpp"

namespace mcs {

/// Chosen-plaintext access to one hidden key. Counts queries and checks the
/// length contract (15n bytes in, 16n bytes out).
class EncryptionOracle
{
public:
    using Function = std::function<Bytes(std::span<const Byte>)>;

    explicit EncryptionOracle(Function fn) : fn_(std::move(fn)) {}

    Bytes operator()(std::span<const Byte> plain);
    std::size_t queries() const noexcept { return queries_; }

private:
    Function fn_;
    std::size_t queries_ = 0;
};

/// Oracle backed by a local cipher instance.
EncryptionOracle make_local_oracle(const SecretKey& key, std::size_t num_blocks);
EncryptionOracle make_local_oracle(Cipher cipher);

/// Canonical byte of Hamming weight w: 2^w - 1.
constexpr Byte canonical_byte(int w) noexcept
{
    return static_cast<Byte>((1u << w) - 1u);
}

/// Per-byte weights of the two expansion differentials at absolute byte index i.
int expansion_weight1(std::size_t i) noexcept;
int expansion_weight2(std::size_t i) noexcept;

std::pair<Differential, Differential> gen_expansion_differentials(std::size_t num_blocks);

/// Ciphertext block weight minus plaintext block weight, per block: the
/// weight of the expanded byte's differential. Throws InconsistentWeights
/// when a value falls outside 0..8.
std::vector<int> observed_expanded_weights(const Differential& plain_diff, std::span<const Byte> cipher_diff);

struct ExpansionRecovery
{
    /// Candidate mask for l(k) (bit p set: position p possible). The last
    /// block's mask is 0 because no later block reveals it.
    std::vector<std::uint16_t> candidates;
    /// Observed expanded-byte weights under the two differentials.
    std::vector<int> weights1;
    std::vector<int> weights2;
    /// Payload position colliding with the expanded byte in an ambiguous block, else -1.
    std::vector<std::int8_t> dup;
    /// Payload position whose weight pair equals the block's own expanded
    /// byte's pair, else -1. Such a byte needs a distinct weight later on,
    /// whether or not l(k) is ambiguous.
    std::vector<std::int8_t> collision;

    std::size_t num_blocks() const noexcept { return candidates.size(); }
    bool ambiguous(std::size_t k) const noexcept;
    /// Unique value or -1.
    int unique_index(std::size_t k) const noexcept;
};

ExpansionRecovery recover_expansion_indices(const Differential& d1, const Differential& d2,
                                            std::span<const Byte> c1, std::span<const Byte> c2);

/// Expanded differentials under a differential and known indices l(k); the
/// expanded byte of block 0 is zero. l(k) = -1 is allowed only for the last block.
std::vector<ExpandedBlock16> expanded_differential(const Differential& d, std::span<const std::int8_t> l);

/// Half-weight contributions wt(E_i) - wt(E_{i+8}) and the decoded pair set
/// of one block in one swap query.
struct SwapBlockPlan
{
    std::array<std::int8_t, 15> weights{};
    std::uint8_t active = 0;      ///< pairs decoded by this query
    std::uint16_t expanded_set = 0; ///< possible weights of the expanded byte (bit w)
    std::int8_t dup_weight = -1;  ///< weight placed at the colliding position, if any
};

struct SwapPlan
{
    std::vector<SwapBlockPlan> blocks;
    Differential diff;
};

/// True when the 2^|S| signed sums of the magnitudes are pairwise distinct.
bool decodable(std::span<const int> magnitudes) noexcept;

/// First swap query. Decodes four pairs per block and gives every colliding
/// position a weight the expanded byte cannot have, which also separates
/// each ambiguous l(k).
SwapPlan plan_swap_stage_a(const ExpansionRecovery& rec);

/// Turns each ambiguous candidate set into a single index using the first
/// swap query's observed expanded weights.
std::vector<std::int8_t> resolve_expansion(const ExpansionRecovery& rec, const SwapPlan& stage_a,
                                           std::span<const int> observed_a);

/// Second swap query: the pairs stage A left undecided, with exact expanded bytes.
SwapPlan plan_swap_stage_b(const SwapPlan& stage_a, std::span<const std::int8_t> l);

/// Unique sign pattern (bit i set: pair i swapped, contribution negated)
/// with sum_i (+-delta_i) over active pairs equal to delta_sum.
/// Throws InvalidDeltaSum when no or several patterns match.
std::uint8_t decode_signed_sum(int delta_sum, const std::array<int, 8>& delta, std::uint8_t active);

/// The (4,5,6,8) instance: bits (b0..b3) for a sum in {+-23, +-15, ...}.
std::array<int, 4> decode_swap_bits(int delta_sum);

/// Decodes one swap query. Returns b4..b11 per block restricted to the
/// plan's active pairs.
std::vector<std::uint8_t> decode_swap_stage(const SwapPlan& plan, std::span<const Byte> cipher_diff,
                                            std::span<const int> observed_expanded);

/// Vertical probe: each half after the cross swaps holds one 255 byte in
/// the same row. Returns the differential and per-block probe rows.
std::pair<Differential, std::vector<std::uint8_t>> gen_vertical_differential(std::size_t num_blocks,
                                                                            std::span<const std::int8_t> l);
/// Row of the single set bit in every column. Throws MalformedColumn.
std::vector<Amounts16> recover_vertical_part(std::span<const Byte> cipher_diff);

/// Horizontal probe: every byte 0x01. Flags blocks whose expanded byte
/// differential is zero (chained back to the first block).
std::pair<Differential, std::vector<std::uint8_t>> gen_horizontal_differential(std::size_t num_blocks,
                                                                      std::span<const std::int8_t> l);

struct HorizontalPart
{
    std::vector<Amounts16> rot_x;
    std::vector<std::int8_t> zero_row; ///< row (0..15) with no set bit, else -1
};
/// Throws MalformedRow.
HorizontalPart recover_horizontal_part(std::span<const Byte> cipher_diff, std::span<const Amounts16> rot_y,
                                       std::span<const std::uint8_t> zero_expanded);

using HalfPerm = std::array<std::array<std::uint8_t, 8>, 2>;

/// Matches each post-cross-swap row tuple of the given queries against the
/// de-rotated ciphertext differential rows. Throws AmbiguousMatch.
std::vector<HalfPerm> recover_byteswap_part(std::span<const std::vector<ExpandedBlock16>> expanded_diffs,
                                            std::span<const Bytes> cipher_diffs, std::span<const std::uint8_t> swap_bits,
                                            std::span<const Amounts16> rot_x, std::span<const Amounts16> rot_y);

struct MaskingPart
{
    std::vector<ExpandedBlock16> seed_star;
    std::vector<bool> expanded_unknown; ///< expanded byte of f0 is the unknown Secret
};
MaskingPart recover_masking_part(std::span<const Byte> known_plain, std::span<const Byte> known_cipher,
                                 std::span<const std::int8_t> l, std::span<const std::uint8_t> swap_bits,
                                 std::span<const HalfPerm> perm, std::span<const Amounts16> rot_x,
                                 std::span<const Amounts16> rot_y);

enum BlockFlags : std::uint8_t {
    kFlagAmbiguousL = 1,   ///< l(k) had two candidates, resolved adaptively
    kFlagLUnknown = 2,     ///< last block: l(k) not observable
    kFlagExemptRow = 4,    ///< one row's horizontal amount is not observable
    kFlagSeedRowUnknown = 8, ///< the expanded row's mask byte is not observable
};

/// Recovered items of one block. Row indices of perm, seed_star and rot_x
/// are relative: relative row e is absolute row (e + offset) mod 8 of its
/// half, where the offset is where the probe row landed.
struct EquivalentBlock
{
    std::int8_t l = -1;
    std::uint8_t swap_bits = 0; ///< b4..b11
    HalfPerm perm{};            ///< post-cross row -> relative row
    ExpandedBlock16 seed_star{};
    Amounts16 rot_x{};
    Amounts16 rot_y{};
    std::int8_t exempt_row = -1; ///< 0..15 or -1
    std::uint8_t probe_row = 0;
    std::uint8_t flags = 0;

    friend bool operator==(const EquivalentBlock&, const EquivalentBlock&) = default;
};

struct EquivalentKey
{
    std::vector<EquivalentBlock> blocks;
    std::size_t num_blocks() const noexcept { return blocks.size(); }
    friend bool operator==(const EquivalentKey&, const EquivalentKey&) = default;
};

/// The six chosen differentials of one run, in query order.
struct DifferentialPlan
{
    Bytes base;
    std::array<Differential, 6> diffs;
    static constexpr std::array<const char*, 6> kRoles{"expansion", "expansion", "swap", "swap", "vertical", "horizontal"};
};

struct AttackDiagnostics
{
    std::size_t queries = 0;
    std::size_t ambiguous_blocks = 0;
    std::size_t exempt_blocks = 0;
    std::vector<std::pair<std::string, double>> stage_seconds;
    DifferentialPlan plan;
};

/// Runs the whole attack with seven oracle queries. Stage errors surface as
/// AttackFailed carrying the stage name.
EquivalentKey run_attack(EncryptionOracle& oracle, std::span<const Byte> base, AttackDiagnostics* diag = nullptr);

/// Decrypts with an equivalent key. Throws NonDivisibleLength and CiphertextTooLong.
Bytes ees_decrypt(std::span<const Byte> cipher, const EquivalentKey& ek);

} // namespace mcs
