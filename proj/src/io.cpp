#include "npat/io.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

#include "npat/error.hpp"

namespace npat {

namespace {

class Writer {
 public:
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void raw(const char* s, std::size_t n) { buf.insert(buf.end(), s, s + n); }
  std::vector<std::uint8_t> buf;

 private:
  void put(std::uint64_t v, int n) {
    for (int b = 0; b < n; ++b) buf.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  }
};

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& b, std::size_t end) : buf_(b), end_(end) {}
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(get(8)); }
  std::size_t pos() const { return pos_; }
  void need(std::uint64_t n) const {
    if (n > end_ - pos_) throw Error(ErrorKind::IoError, "FieldFile is truncated");
  }

 private:
  std::uint64_t get(int n) {
    need(static_cast<std::uint64_t>(n));
    std::uint64_t v = 0;
    for (int b = 0; b < n; ++b) v |= static_cast<std::uint64_t>(buf_[pos_++]) << (8 * b);
    return v;
  }
  const std::vector<std::uint8_t>& buf_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(const std::uint8_t* p, std::size_t n) {
  uLong c = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths
  while (n > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    c = crc32(c, p, chunk);
    p += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(c);
}

std::uint64_t product(const std::vector<std::uint64_t>& dims) {
  std::uint64_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

Grid grid_of(const FieldFile& f) {
  if (f.dims.size() != 2) throw Error(ErrorKind::IoError, "field file must be two-dimensional");
  return Grid(static_cast<int>(f.dims[1]), static_cast<int>(f.dims[0]), f.h, f.x0, f.y0);
}

FieldFile read_kind(const std::string& path, FileKind kind) {
  FieldFile f = decode_field_file(read_bytes(path));
  if (f.kind != kind) throw Error(ErrorKind::IoError, path + ": unexpected FieldFile kind");
  return f;
}

void check_grid(const std::string& path, const FieldFile& f, const Grid& grid) {
  if (!(grid_of(f) == grid)) throw Error(ErrorKind::GeometryMismatch, path + ": grid does not match the run geometry");
}

}  // namespace

std::vector<std::uint8_t> encode_field_file(const FieldFile& f) {
  if (product(f.dims) != f.data.size()) throw Error(ErrorKind::InvalidArgument, "FieldFile dims do not match payload");
  Writer w;
  w.raw("NPAT", 4);
  w.u16(kFieldFileVersion);
  w.u16(static_cast<std::uint16_t>(f.kind));
  w.u16(1);
  w.u16(static_cast<std::uint16_t>(f.dims.size()));
  for (auto d : f.dims) w.u64(d);
  if (f.kind == FileKind::Trace) {
    if (f.dims.size() != 2 || f.nodes.size() != f.dims[1]) {
      throw Error(ErrorKind::InvalidArgument, "trace node list does not match dims");
    }
    w.f64(f.dt);
    w.f64(f.t_start);
    w.u32(f.interval);
    w.u32(0);
    for (auto n : f.nodes) w.u64(n);
  } else {
    w.f64(f.x0);
    w.f64(f.y0);
    w.f64(f.h);
  }
  w.buf.reserve(w.buf.size() + 8 * f.data.size() + 4);
  for (double v : f.data) w.f64(v);
  w.u32(crc_of(w.buf.data(), w.buf.size()));
  return std::move(w.buf);
}

FieldFile decode_field_file(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 16 || !std::equal(bytes.begin(), bytes.begin() + 4, "NPAT")) {
    throw Error(ErrorKind::IoError, "not a FieldFile (bad magic)");
  }
  const std::size_t body = bytes.size() - 4;
  std::uint32_t stored = 0;
  for (int b = 0; b < 4; ++b) stored |= static_cast<std::uint32_t>(bytes[body + b]) << (8 * b);
  if (stored != crc_of(bytes.data(), body)) throw Error(ErrorKind::IoError, "FieldFile CRC mismatch");

  Reader r(bytes, body);
  r.u32();  // magic, checked above
  FieldFile f;
  if (r.u16() != kFieldFileVersion) throw Error(ErrorKind::IoError, "unsupported FieldFile version");
  const std::uint16_t kind = r.u16();
  if (kind > 2) throw Error(ErrorKind::IoError, "unknown FieldFile kind");
  f.kind = static_cast<FileKind>(kind);
  if (r.u16() != 1) throw Error(ErrorKind::IoError, "unsupported FieldFile dtype");
  const std::uint16_t ndims = r.u16();
  for (int d = 0; d < ndims; ++d) f.dims.push_back(r.u64());
  if (f.kind == FileKind::Trace) {
    if (ndims != 2) throw Error(ErrorKind::IoError, "trace FieldFile must be two-dimensional");
    f.dt = r.f64();
    f.t_start = r.f64();
    f.interval = r.u32();
    r.u32();
    r.need(8 * f.dims[1]);
    for (std::uint64_t q = 0; q < f.dims[1]; ++q) f.nodes.push_back(r.u64());
  } else {
    f.x0 = r.f64();
    f.y0 = r.f64();
    f.h = r.f64();
  }
  const std::uint64_t n = product(f.dims);
  if (n > (body - r.pos()) / 8 || body - r.pos() != 8 * n) {
    throw Error(ErrorKind::IoError, "FieldFile payload length does not match dims");
  }
  f.data.resize(n);
  for (auto& v : f.data) v = r.f64();
  return f;
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorKind::IoError, "cannot open " + path + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error(ErrorKind::IoError, "write failed: " + path);
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::IoError, "cannot open " + path);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

void write_field(const std::string& path, const Grid& grid, const Field& values) {
  if (values.size() != grid.size()) throw Error(ErrorKind::InvalidArgument, "field size does not match grid");
  FieldFile f;
  f.kind = FileKind::Field;
  f.dims = {static_cast<std::uint64_t>(grid.ny), static_cast<std::uint64_t>(grid.nx)};
  f.x0 = grid.x0;
  f.y0 = grid.y0;
  f.h = grid.h;
  f.data = values;
  write_bytes(path, encode_field_file(f));
}

void write_mask(const std::string& path, const Grid& grid, const RegionMask& mask) {
  FieldFile f;
  f.kind = FileKind::Mask;
  f.dims = {static_cast<std::uint64_t>(grid.ny), static_cast<std::uint64_t>(grid.nx)};
  f.x0 = grid.x0;
  f.y0 = grid.y0;
  f.h = grid.h;
  f.data.assign(mask.mask.begin(), mask.mask.end());
  write_bytes(path, encode_field_file(f));
}

void write_trace(const std::string& path, const MeasurementTrace& trace) {
  FieldFile f;
  f.kind = FileKind::Trace;
  f.dims = {trace.n_samples(), trace.n_nodes()};
  f.dt = trace.dt;
  f.t_start = trace.t_start;
  f.interval = trace.interval == Interval::Plus ? 0 : 1;
  f.nodes.assign(trace.nodes.begin(), trace.nodes.end());
  f.data = trace.values;
  write_bytes(path, encode_field_file(f));
}

Field read_field(const std::string& path, const Grid& grid) {
  FieldFile f = read_kind(path, FileKind::Field);
  check_grid(path, f, grid);
  return std::move(f.data);
}

RegionMask read_mask(const std::string& path, const Grid& grid) {
  FieldFile f = read_kind(path, FileKind::Mask);
  check_grid(path, f, grid);
  std::vector<std::uint8_t> m(f.data.size());
  for (std::size_t k = 0; k < m.size(); ++k) m[k] = f.data[k] != 0.0 ? 1 : 0;
  return make_region(grid, std::move(m));
}

MeasurementTrace read_trace(const std::string& path) {
  FieldFile f = read_kind(path, FileKind::Trace);
  MeasurementTrace t;
  t.dt = f.dt;
  t.t_start = f.t_start;
  t.interval = f.interval == 0 ? Interval::Plus : Interval::Minus;
  t.nodes.assign(f.nodes.begin(), f.nodes.end());
  t.values = std::move(f.data);
  return t;
}

Grid read_grid(const std::string& path) {
  FieldFile f = decode_field_file(read_bytes(path));
  if (f.kind == FileKind::Trace) throw Error(ErrorKind::IoError, path + ": trace files carry no grid");
  return grid_of(f);
}

PgmRange write_pgm(const std::string& path, const Grid& grid, const Field& values) {
  if (values.size() != grid.size()) throw Error(ErrorKind::InvalidArgument, "field size does not match grid");
  PgmRange range{values[0], values[0]};
  for (double v : values) {
    range.lo = std::min(range.lo, v);
    range.hi = std::max(range.hi, v);
  }
  const double span = range.hi - range.lo;
  std::string out = "P5\n" + std::to_string(grid.nx) + " " + std::to_string(grid.ny) + "\n65535\n";
  out.reserve(out.size() + 2 * grid.size());
  for (int j = grid.ny - 1; j >= 0; --j) {
    for (int i = 0; i < grid.nx; ++i) {
      const double v = values[grid.index(i, j)];
      const long q = span > 0.0 ? std::lround((v - range.lo) / span * 65535.0) : 0;
      const auto p = static_cast<std::uint16_t>(std::clamp<long>(q, 0, 65535));
      out.push_back(static_cast<char>(p >> 8));
      out.push_back(static_cast<char>(p & 0xff));
    }
  }
  write_bytes(path, std::vector<std::uint8_t>(out.begin(), out.end()));
  return range;
}

PgmImage read_pgm(const std::string& path) {
  const auto bytes = read_bytes(path);
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    std::string t;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) t.push_back(static_cast<char>(bytes[pos++]));
    return t;
  };
  if (token() != "P5") throw Error(ErrorKind::IoError, path + ": not a binary PGM");
  PgmImage img;
  try {
    img.width = std::stoi(token());
    img.height = std::stoi(token());
    if (std::stoi(token()) != 65535) throw Error(ErrorKind::IoError, path + ": expected maxval 65535");
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::IoError, path + ": malformed PGM header");
  }
  ++pos;  // single whitespace before the raster
  const std::size_t n = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  if (bytes.size() - pos != 2 * n) throw Error(ErrorKind::IoError, path + ": PGM raster has wrong length");
  img.pixels.resize(n);
  for (std::size_t q = 0; q < n; ++q) {
    img.pixels[q] = static_cast<std::uint16_t>((bytes[pos + 2 * q] << 8) | bytes[pos + 2 * q + 1]);
  }
  return img;
}

Field decode_pgm(const PgmImage& img, const PgmRange& range) {
  Field out(img.pixels.size());
  const double scale = (range.hi - range.lo) / 65535.0;
  for (int r = 0; r < img.height; ++r) {
    const int j = img.height - 1 - r;
    for (int i = 0; i < img.width; ++i) {
      out[static_cast<std::size_t>(j) * img.width + i] =
          range.lo + scale * img.pixels[static_cast<std::size_t>(r) * img.width + i];
    }
  }
  return out;
}

}  // namespace npat
