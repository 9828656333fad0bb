#pragma once

#include <filesystem>

#include "mcs/core.hpp"

namespace mcs::cli {

/// Whole-file reads and writes; "-" means stdin / stdout.
Bytes read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const Byte> data);

} // namespace mcs::cli
