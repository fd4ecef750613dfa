#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace parcelsense::png {

enum class ColorKind { Gray, GrayAlpha, Rgb, Rgba, Palette };

struct Decoded {
  int width = 0;
  int height = 0;
  int bit_depth = 0;
  ColorKind color = ColorKind::Gray;
  int channels = 0;
  /// Samples widened to 16 bits, channel-interleaved, row-major.
  std::vector<std::uint16_t> samples;
};

/// Throws DataError on missing or malformed files. Palette and sub-byte
/// images are decoded only as far as the header (samples left empty).
Decoded read(const std::filesystem::path& path);

void write8(const std::filesystem::path& path, int width, int height, int channels,
            const std::uint8_t* data);
void write16_gray(const std::filesystem::path& path, int width, int height,
                  const std::uint16_t* data);

}  // namespace parcelsense::png
