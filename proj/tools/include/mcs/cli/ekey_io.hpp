#pragma once

#include <filesystem>

#include "mcs/attack.hpp"

namespace mcs::cli {

/// "MCSE", version byte, u32 block count, then per block a u16 record
/// length followed by l, swap bits, both half permutations, Seed*, row and
/// column amounts, flags, exempt row and probe row. Little endian.
inline constexpr std::uint8_t kEquivalentKeyVersion = 1;
inline constexpr std::size_t kEquivalentRecordSize = 1 + 1 + 16 + 16 + 16 + 16 + 1 + 1 + 1;

Bytes serialize_equivalent_key(const EquivalentKey& ek);
/// Throws ParseError on a bad magic, version or truncated record.
EquivalentKey deserialize_equivalent_key(std::span<const Byte> data);

EquivalentKey read_equivalent_key(const std::filesystem::path& path);
void write_equivalent_key(const std::filesystem::path& path, const EquivalentKey& ek);

} // namespace mcs::cli
