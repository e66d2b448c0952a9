#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>

#include "npat/error.hpp"
#include "npat/io.hpp"

using namespace npat;

namespace {

std::string tmp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "npat_test_io";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("field round trip is bit exact") {
    Grid g(9, 11, 0.125, -1.0, 2.0);
    Field f(g.size());
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    for (double& v : f) v = nd(rng);
    f[3] = -0.0;
    f[4] = 1e-310;
    const auto path = tmp_path("f.npat");
    write_field(path, g, f);
    const Field back = read_field(path, g);
    REQUIRE(back.size() == f.size());
    for (std::size_t k = 0; k < f.size(); ++k) CHECK(std::signbit(back[k]) == std::signbit(f[k]));
    CHECK(std::memcmp(back.data(), f.data(), 8 * f.size()) == 0);
    CHECK(read_grid(path) == g);
  }

  TEST_CASE("header layout") {
    Grid g(8, 8, 1.0);
    const auto bytes = [&] {
      FieldFile f;
      f.dims = {8, 8};
      f.h = 1.0;
      f.data.assign(64, 0.5);
      return encode_field_file(f);
    }();
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "NPAT");
    CHECK(bytes[4] == 1);
    CHECK(bytes[5] == 0);
    CHECK(bytes.size() == 4 + 2 * 4 + 2 * 8 + 3 * 8 + 64 * 8 + 4);
  }

  TEST_CASE("corruption is detected") {
    Grid g(8, 8, 1.0);
    const auto path = tmp_path("c.npat");
    write_field(path, g, Field(g.size(), 1.0));
    auto bytes = read_bytes(path);
    bytes[100] ^= 0x01;
    CHECK_THROWS_AS(decode_field_file(bytes), Error);
    bytes = read_bytes(path);
    bytes.pop_back();
    CHECK_THROWS_AS(decode_field_file(bytes), Error);
  }

  TEST_CASE("grid mismatch") {
    Grid g(8, 8, 1.0), other(8, 8, 0.5);
    const auto path = tmp_path("m.npat");
    write_field(path, g, Field(g.size(), 1.0));
    try {
      read_field(path, other);
      FAIL("expected GeometryMismatch");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::GeometryMismatch);
    }
  }

  TEST_CASE("trace and mask round trip") {
    MeasurementTrace t;
    t.dt = 0.01;
    t.t_start = -0.5;
    t.interval = Interval::Minus;
    t.nodes = {0, 1, 2, 9};
    t.values.resize(4 * 51);
    for (std::size_t k = 0; k < t.values.size(); ++k) t.values[k] = std::sin(0.1 * k);
    const auto path = tmp_path("t.npat");
    write_trace(path, t);
    const auto b = read_trace(path);
    CHECK(b.dt == t.dt);
    CHECK(b.t_start == t.t_start);
    CHECK(b.interval == Interval::Minus);
    CHECK(b.nodes == t.nodes);
    CHECK(b.values == t.values);

    Grid g(10, 10, 0.1);
    std::vector<std::uint8_t> m(g.size(), 0);
    m[g.index(4, 5)] = 1;
    const auto mp = tmp_path("k.npat");
    write_mask(mp, g, make_region(g, m));
    CHECK(read_mask(mp, g).mask == m);
  }

  TEST_CASE("PGM quantisation bound") {
    Grid g(17, 13, 0.1);
    Field f(g.size());
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = std::sin(0.37 * k) * 3.0 + 0.2;
    const auto path = tmp_path("e.pgm");
    const PgmRange r = write_pgm(path, g, f);
    const auto img = read_pgm(path);
    CHECK(img.width == 17);
    CHECK(img.height == 13);
    const Field back = decode_pgm(img, r);
    double worst = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) worst = std::max(worst, std::abs(back[k] - f[k]));
    CHECK(worst <= (r.hi - r.lo) / 65535.0);
    bool has_min = false, has_max = false;
    for (auto p : img.pixels) {
      has_min = has_min || p == 0;
      has_max = has_max || p == 65535;
    }
    CHECK(has_min);
    CHECK(has_max);
  }
}
