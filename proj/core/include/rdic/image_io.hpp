#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rdic/image.hpp"

namespace rdic {

// Binary PGM ("P5") / PPM ("P6") with maxval 255. The writer emits a
// canonical header: magic, single "w h" line, "255", one newline, raw samples.
Image read_pnm(const std::string& path);
Image parse_pnm(const std::vector<std::uint8_t>& bytes);

void write_pnm(const Image& img, const std::string& path);
std::vector<std::uint8_t> pnm_bytes(const Image& img);

// Grayscale PFM ("Pf"), little-endian (scale header "-1.0"), float32 samples,
// scanlines stored bottom-to-top.
FloatPlane read_pfm(const std::string& path);
FloatPlane parse_pfm(const std::vector<std::uint8_t>& bytes);

void write_pfm(const FloatPlane& plane, const std::string& path);
std::vector<std::uint8_t> pfm_bytes(const FloatPlane& plane);

// Whole-file helpers shared by the codec and the CLI.
std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);

} // namespace rdic
