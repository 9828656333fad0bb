#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>

#include "mcs/core.hpp"

namespace mcs::cli {

/// Parses `name=value` lines. Blank lines and lines starting with '#' are
/// skipped. x0 is either 1..33 hex digits or a decimal literal with a '.'.
SecretKey parse_key(std::string_view text);

/// Canonical form; x0 is always written as 33 hex digits.
std::string emit_key(const SecretKey& key);

SecretKey read_key_file(const std::filesystem::path& path);
void write_key_file(const std::filesystem::path& path, const SecretKey& key);

/// (alpha, beta) uniform over the 21 legal pairs, secret and x0 uniform.
SecretKey random_key(std::mt19937_64& rng);
SecretKey generate_key(std::uint64_t seed);

} // namespace mcs::cli
