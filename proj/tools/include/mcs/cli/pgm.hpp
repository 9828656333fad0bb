#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mcs/core.hpp"

namespace mcs::cli {

/// Binary greymap (P5) with maxval 255.
struct PgmImage
{
    std::size_t width = 0;
    std::size_t height = 0;
    Bytes pixels;                      ///< width * height bytes, row major
    std::vector<std::string> comments; ///< without the leading '#', in order

    friend bool operator==(const PgmImage&, const PgmImage&) = default;
};

/// Throws ParseError on anything that is not an 8-bit P5 file.
PgmImage parse_pgm(std::span<const Byte> file);
Bytes emit_pgm(const PgmImage& image);

/// Value of a `# key=value` comment, if present.
std::optional<std::size_t> comment_value(const PgmImage& image, std::string_view key);

inline constexpr std::string_view kCipherBytesTag = "mcs-cipher-bytes";
inline constexpr std::string_view kPlainBytesTag = "mcs-plain-bytes";

/// Lays a byte stream out as width x ceil(len / width), zero filling the
/// last row, and records the stream length under `tag`.
PgmImage wrap_stream(std::span<const Byte> stream, std::size_t width, std::string_view tag);

} // namespace mcs::cli
