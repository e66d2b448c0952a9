#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "npat/geometry.hpp"
#include "npat/wave.hpp"

namespace npat {

/// Binary container for fields, masks and traces. Layout (all little-endian):
///   "NPAT" | u16 version=1 | u16 kind | u16 dtype=1 (f64) | u16 ndims | u64 dims[ndims]
///   field/mask: f64 x0, f64 y0, f64 h
///   trace:      f64 dt, f64 t_start, u32 interval (0 plus, 1 minus), u32 0, u64 node[dims[1]]
///   f64 payload[prod(dims)] row-major | u32 CRC32 of everything before it
enum class FileKind : std::uint16_t { Field = 0, Trace = 1, Mask = 2 };

struct FieldFile {
  FileKind kind = FileKind::Field;
  std::vector<std::uint64_t> dims;
  double x0 = 0.0;
  double y0 = 0.0;
  double h = 0.0;
  double dt = 0.0;
  double t_start = 0.0;
  std::uint32_t interval = 0;
  std::vector<std::uint64_t> nodes;
  std::vector<double> data;
};

inline constexpr std::uint16_t kFieldFileVersion = 1;

std::vector<std::uint8_t> encode_field_file(const FieldFile& f);
/// Throws IoError on bad magic, version, dtype, length or CRC.
FieldFile decode_field_file(const std::vector<std::uint8_t>& bytes);

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> read_bytes(const std::string& path);

void write_field(const std::string& path, const Grid& grid, const Field& values);
void write_mask(const std::string& path, const Grid& grid, const RegionMask& mask);
void write_trace(const std::string& path, const MeasurementTrace& trace);

/// Reads a field; throws GeometryMismatch if its grid differs from `grid`.
Field read_field(const std::string& path, const Grid& grid);
RegionMask read_mask(const std::string& path, const Grid& grid);
MeasurementTrace read_trace(const std::string& path);
/// Grid stored in a field or mask file.
Grid read_grid(const std::string& path);

struct PgmRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// 16-bit binary PGM (P5, maxval 65535, big-endian samples) with the linear map
/// lo -> 0, hi -> 65535; the top image row is the largest y. A constant field maps to 0.
PgmRange write_pgm(const std::string& path, const Grid& grid, const Field& values);

struct PgmImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> pixels;  // row-major, top row first
};

PgmImage read_pgm(const std::string& path);
/// Inverse of the linear map back onto grid ordering.
Field decode_pgm(const PgmImage& img, const PgmRange& range);

}  // namespace npat
