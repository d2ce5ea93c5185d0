#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "obscura/image.hpp"
#include "obscura/optics.hpp"
#include "obscura/sensor.hpp"

namespace obscura::io {

/// Reads an 8/16-bit PNG (linear mapping to [0,1], no gamma) or a PFM file.
/// The format is detected from the file signature. Gray+alpha and RGBA lose
/// their alpha; palette images are expanded.
PlanarImage read_image(const std::filesystem::path& path);

/// Decodes an in-memory PNG or PFM buffer.
PlanarImage decode_image(std::span<const std::uint8_t> bytes);

/// Writes a PNG with `bit_depth` 8 or 16 (values clipped to [0,1]) or, for a
/// `.pfm` extension, a little-endian float map (bit_depth ignored).
void write_image(const std::filesystem::path& path, const PlanarImage& image, int bit_depth = 16);

std::vector<std::uint8_t> encode_png(const PlanarImage& image, int bit_depth);
std::vector<std::uint8_t> encode_pfm(const PlanarImage& image);

/// Sidecar metadata path for `path`: the same name with ".txt" appended.
std::filesystem::path sidecar_path(const std::filesystem::path& path);

/// PSF as a grayscale PFM plus a sidecar holding `pitch_m=<float>`.
void write_psf(const std::filesystem::path& path, const Psf& psf);
Psf read_psf(const std::filesystem::path& path);

/// Writes `freq_cyc_per_mm,modulation` CSV.
void write_mtf_csv(const std::filesystem::path& path, const MtfCurve& curve);

/// 16-bit grayscale PNG mosaic plus a sidecar declaring `pattern=` and
/// `black_level=` (in raw code values of the PNG bit depth).
BayerImage read_bayer(const std::filesystem::path& path);
void write_bayer(const std::filesystem::path& path, const BayerImage& raw);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// Lower-case hex SHA-256 of a byte buffer / file.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace obscura::io
