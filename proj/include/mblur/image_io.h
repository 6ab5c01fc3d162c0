#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mblur/plane.h"
#include "mblur/vec.h"

namespace mblur {

/// PFM, 32-bit floats, little-endian (scale -1.0), rows bottom-up.
void write_pfm(const std::string& path, const Plane<Vec3>& rgb);
void write_pfm(const std::string& path, const Plane<double>& gray);
/// Two-channel data goes out as RGB with a zero blue channel.
void write_pfm(const std::string& path, const Plane<Vec2>& vec);

/// Reads PF (color) or Pf (grayscale, replicated to RGB). Throws
/// std::runtime_error with the path on malformed input.
Plane<Vec3> read_pfm(const std::string& path);

/// PNG encoders (zlib deflate, filter 0). The byte-level variants exist so
/// tests can check the container without touching the filesystem.
std::vector<uint8_t> encode_png_rgb8(const Plane<Vec3>& linear);    // gamma 1/2.2, clamped
std::vector<uint8_t> encode_png_gray8(const Plane<uint8_t>& gray);  // values as-is
std::vector<uint8_t> encode_png_gray16(const Plane<int>& values);   // clamped to [0, 65535]

void write_png_rgb8(const std::string& path, const Plane<Vec3>& linear);
void write_png_gray8(const std::string& path, const Plane<uint8_t>& gray);
void write_png_gray16(const std::string& path, const Plane<int>& values);

}  // namespace mblur
