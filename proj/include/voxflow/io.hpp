#pragma once

// Binary file formats.
//
// RVOL (little-endian):
//   "RVOL" | u8 version = 1 | u32 T, Z, Y, X | u8 dtype | u32 dt_seconds |
//   Z x f32 altitude (m) | payload [t][z][y][x] | optional "RHOH" chunk.
//   dtype 0: f32 dBZ, invalid = NaN.
//   dtype 1: u8, dBZ = v / 2 - 32, v = 255 invalid.
//   RHOH: "RHOH" followed by T*Z*Y*X u8, rho_hv = v / 200.
//
// RMF1 (little-endian):
//   "RMF1" | u32 Z, Y, X | f32 payload [z][component][y][x] (u, then v).

#include <filesystem>
#include <stdexcept>
#include <string>

#include "voxflow/grid.hpp"

namespace voxflow {

/// Malformed or truncated file; `field` names the header field or chunk that
/// failed.
struct FormatError : std::runtime_error {
  FormatError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field(field) {}
  std::string field;
};

enum class RvolDtype : std::uint8_t { F32 = 0, U8 = 1 };

/// Quantization used by dtype 1.
std::uint8_t quantize_dbz(double dbz);
double dequantize_dbz(std::uint8_t v);

void write_rvol(const std::filesystem::path& path, const RadarVolume& vol, RvolDtype dtype = RvolDtype::F32);

/// Per-cell validity in the file is folded into the time-invariant mask: a
/// cell is valid when it is valid in every frame. Invalid data is replaced by
/// the no-echo value in memory.
RadarVolume read_rvol(const std::filesystem::path& path);

void write_motion(const std::filesystem::path& path, const MotionField& mf);
MotionField read_motion(const std::filesystem::path& path);

}  // namespace voxflow
