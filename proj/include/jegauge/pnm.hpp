#pragma once

#include <filesystem>

#include "jegauge/image.hpp"

namespace jegauge {

/// Binary PGM (P5) or PPM (P6) with maxval 255. Header comments are skipped
/// on read and never written.
Frame read_frame_pnm(const std::filesystem::path& path);
void write_frame_pnm(const Frame& f, const std::filesystem::path& path);

Frame decode_pnm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_pnm(const Frame& f);

}  // namespace jegauge
