#include <doctest.h>

#include <cmath>
#include <numbers>

#include "npat/error.hpp"
#include "npat/geometry.hpp"
#include "oracles.hpp"

using namespace npat;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an npat::Error");
  return ErrorKind::InvalidArgument;
}

/// Left edge {x = 0, 0 <= y <= 1} as the only measurement segment, other edges Wall.
BoundaryMap left_edge_map(const Grid& g) {
  BoundaryMap b;
  b.cls.assign(g.size(), NodeClass::Interior);
  b.chi0.assign(g.size(), 0.0);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (!g.on_edge(i, j)) continue;
      const auto k = g.index(i, j);
      if (i == 0 && g.y(j) <= 1.0 + 1e-12) {
        b.cls[k] = NodeClass::Measurement;
        b.chi0[k] = 1.0;
      } else {
        b.cls[k] = NodeClass::Wall;
      }
    }
  }
  return b;
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("grid invariants") {
    CHECK_THROWS_AS(Grid(7, 10, 0.1), Error);
    CHECK_THROWS_AS(Grid(10, 10, 0.0), Error);
    Grid g(10, 12, 0.5, 1.0, -2.0);
    CHECK(g.size() == 120);
    CHECK(g.x(3) == doctest::Approx(2.5));
    CHECK(g.y(4) == doctest::Approx(0.0));
    CHECK(g.col(g.index(3, 7)) == 3);
    CHECK(g.row(g.index(3, 7)) == 7);
  }

  TEST_CASE("speed field extrema and positivity") {
    Grid g(10, 10, 0.1);
    auto s = SpeedField::gradient(g, 1.0, 0.5, 0);
    CHECK(s.cmin() == doctest::Approx(1.0));
    CHECK(s.cmax() == doctest::Approx(1.45));
    Field bad(g.size(), 1.0);
    bad[5] = 0.0;
    CHECK_THROWS_AS(SpeedField(g, bad), Error);
  }

  TEST_CASE("corner geometry node counts") {
    auto [g, b] = build_corner_geometry(1.0, 2.0, 0.05);
    CHECK(g.nx == 61);
    CHECK(g.ny == 61);
    int on_x = 0, on_y = 0;
    for (int i = 0; i < g.nx; ++i) on_x += b[g.index(i, 0)] == NodeClass::Measurement;
    for (int j = 0; j < g.ny; ++j) on_y += b[g.index(0, j)] == NodeClass::Measurement;
    CHECK(on_x == 21);
    CHECK(on_y == 21);
    CHECK(b[g.index(21, 0)] == NodeClass::Wall);
    CHECK(b[g.index(60, 5)] == NodeClass::Truncation);
    CHECK(b[g.index(5, 60)] == NodeClass::Truncation);
    CHECK(b[g.index(5, 5)] == NodeClass::Interior);
    validate_boundary_map(g, b);
  }

  TEST_CASE("corner geometry with zero pad") {
    auto [g, b] = build_corner_geometry(1.0, 0.0, 0.05);
    CHECK(g.nx == 21);
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        if (!g.on_edge(i, j)) continue;
        const auto c = b[g.index(i, j)];
        CHECK((c == NodeClass::Measurement || c == NodeClass::Truncation));
      }
    }
  }

  TEST_CASE("spacing must tile the arm") {
    CHECK(kind_of([] { build_corner_geometry(1.0, 2.0, 0.03); }) == ErrorKind::NonDivisibleSpacing);
  }

  TEST_CASE("chi0 ramp") {
    const double arm = 1.0, h = 0.025;
    auto [g, b] = build_corner_geometry(arm, 1.0, h);
    const double max_step = std::numbers::pi * h / (2.0 * kChi0RampFraction * arm);
    for (std::size_t k = 0; k < g.size(); ++k) {
      CHECK(b.chi0[k] >= 0.0);
      CHECK(b.chi0[k] <= 1.0);
      if (b[k] != NodeClass::Measurement) CHECK(b.chi0[k] == 0.0);
    }
    for (int i = 0; i + 1 < g.nx; ++i) {
      CHECK(std::abs(b.chi0[g.index(i + 1, 0)] - b.chi0[g.index(i, 0)]) <= max_step + 1e-12);
    }
    CHECK(b.chi0[g.index(0, 0)] == 1.0);
    CHECK(b.chi0[g.index(40, 0)] == 0.0);  // arm endpoint
    CHECK(b.chi0[g.index(20, 0)] == 1.0);  // plateau
    CHECK(b.chi0[g.index(39, 0)] > 0.0);
  }

  TEST_CASE("domain of influence for a flat segment") {
    Grid g(61, 41, 0.025);
    auto b = left_edge_map(g);
    auto c = SpeedField::constant(g, 1.0);
    auto m = domain_of_influence(g, c, b, 0.5);
    CHECK(m[g.index(12, 20)]);   // (0.3, 0.5)
    CHECK(!m[g.index(48, 20)]);  // (1.2, 0.5)
  }

  TEST_CASE("domain of influence is monotone in T") {
    auto [g, b] = build_corner_geometry(1.0, 1.0, 0.05);
    auto c = SpeedField::gradient(g, 1.0, 0.5, 1);
    auto m1 = domain_of_influence(g, c, b, 0.3);
    auto m2 = domain_of_influence(g, c, b, 0.7);
    CHECK(mask_subset(m1, m2));
    CHECK(m2.count() > m1.count());
  }

  TEST_CASE("fast marching matches the Dijkstra oracle") {
    Grid g(41, 41, 0.025);
    auto b = left_edge_map(g);
    auto c = SpeedField::gradient(g, 1.0, 0.5, 0);
    const auto t = travel_times(g, c, b);
    const auto d = oracle::dijkstra(g, c, b.measurement_nodes());
    double worst = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) worst = std::max(worst, std::abs(t[k] - d[k]));
    CHECK(worst <= 2.0 * g.h / c.cmin());
  }

  TEST_CASE("fast marching for constant speed equals Euclidean distance") {
    Grid g(41, 41, 0.025);
    auto [cg, cb] = build_corner_geometry(0.5, 0.5, 0.025);
    auto c = SpeedField::constant(cg, 2.0);
    const auto t = travel_times(cg, c, cb);
    const auto src = cb.measurement_nodes();
    double worst = 0.0;
    for (std::size_t k = 0; k < cg.size(); ++k) {
      double best = 1e300;
      for (auto s : src) {
        best = std::min(best, std::hypot(cg.x(cg.col(k)) - cg.x(cg.col(s)), cg.y(cg.row(k)) - cg.y(cg.row(s))));
      }
      worst = std::max(worst, std::abs(t[k] - best / 2.0));
    }
    CHECK(cg.nx == 41);
    CHECK(worst <= 2.0 * cg.h / 2.0);
  }

  TEST_CASE("region from phantom") {
    Grid g(41, 41, 0.025);
    Field zero(g.size(), 0.0);
    CHECK(region_from_phantom(g, zero, 1e-6).empty());

    Field bump(g.size(), 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double r = std::hypot(g.x(g.col(k)) - 0.5, g.y(g.row(k)) - 0.5) / 0.2;
      bump[k] = r < 1 ? std::exp(1 - 1 / (1 - r * r)) : 0.0;
    }
    auto m = region_from_phantom(g, bump, 1e-6);
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (bump[k] != 0.0) CHECK(m[k]);
    }
    CHECK(m.margin >= 2);

    Field at_wall(g.size(), 0.0);
    at_wall[g.index(0, 20)] = 1.0;
    CHECK(kind_of([&] { region_from_phantom(g, at_wall, 1e-6); }) == ErrorKind::InteriorViolation);
  }

  TEST_CASE("mask distance") {
    Grid g(20, 20, 0.1);
    std::vector<std::uint8_t> a(g.size(), 0), b(g.size(), 0);
    a[g.index(2, 2)] = 1;
    b[g.index(5, 6)] = 1;
    auto ma = make_region(g, a), mb = make_region(g, b);
    CHECK(mask_distance(g, ma, ma) == 0.0);
    CHECK(mask_distance(g, ma, mb) == doctest::Approx(0.5));
    auto empty = make_region(g, std::vector<std::uint8_t>(g.size(), 0));
    CHECK(kind_of([&] { mask_distance(g, ma, empty); }) == ErrorKind::EmptyMask);
  }

  TEST_CASE("region inside the domain of influence has positive distance to its complement") {
    auto [g, b] = build_corner_geometry(1.0, 1.0, 0.05);
    auto c = SpeedField::constant(g, 1.0);
    auto doi = domain_of_influence(g, c, b, 0.6);
    std::vector<std::uint8_t> k(g.size(), 0);
    for (int j = 4; j <= 6; ++j) {
      for (int i = 4; i <= 6; ++i) k[g.index(i, j)] = 1;
    }
    auto K = make_region(g, k);
    std::vector<std::uint8_t> outside(g.size(), 0);
    for (std::size_t q = 0; q < g.size(); ++q) outside[q] = doi[q] ? 0 : 1;
    CHECK(mask_distance(g, K, make_region(g, outside)) > 0.0);
    CHECK(mask_subset(K, doi));
  }

  TEST_CASE("causal padding check") {
    auto [g, b] = build_corner_geometry(1.0, 1.0, 0.05);
    auto c = SpeedField::constant(g, 1.0);
    CHECK_NOTHROW(check_causal_padding(g, c, b, nullptr, 0.3));
    CHECK(kind_of([&] { check_causal_padding(g, c, b, nullptr, 0.6); }) == ErrorKind::PadTooSmall);
  }
}
