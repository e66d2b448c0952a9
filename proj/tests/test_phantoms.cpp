#include <doctest.h>

#include <cmath>

#include "npat/error.hpp"
#include "npat/phantoms.hpp"
#include "npat/wave.hpp"

using namespace npat;

namespace {

Setup corner_setup(double h) {
  auto [g, b] = build_corner_geometry(1.0, 1.0, h);
  return make_setup(g, SpeedField::constant(g, 1.0), b, 0.3);
}

}  // namespace

TEST_SUITE("phantoms") {
  TEST_CASE("zero amplitude gives the zero pair") {
    Grid g(41, 41, 0.025);
    PhantomSpec s;
    s.centers = {{0.5, 0.5}};
    s.radii = {0.2};
    s.amplitudes = {0.0};
    auto p = make_phantom(s, g);
    for (double v : p.u0) CHECK(v == 0.0);
    for (double v : p.u1) CHECK(v == 0.0);
  }

  TEST_CASE("single bump support and peak") {
    Grid g(41, 41, 0.025);
    PhantomSpec s;
    s.centers = {{0.5, 0.5}};
    s.radii = {0.2};
    s.amplitudes = {2.5};
    auto p = make_phantom(s, g);
    CHECK(p.u0[g.index(20, 20)] == doctest::Approx(2.5).epsilon(1e-15));
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double r = std::hypot(g.x(g.col(k)) - 0.5, g.y(g.row(k)) - 0.5);
      if (r >= 0.2) CHECK(p.u0[k] == 0.0);
      CHECK(p.u1[k] == 0.0);
    }
  }

  TEST_CASE("support must stay 4h inside") {
    Grid g(41, 41, 0.025);
    PhantomSpec s;
    s.centers = {{0.25, 0.5}};
    s.radii = {0.2};
    try {
      make_phantom(s, g);
      FAIL("expected SupportViolation");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::SupportViolation);
    }
  }

  TEST_CASE("annulus and velocity part") {
    Grid g(61, 61, 0.025);
    PhantomSpec s;
    s.kind = PhantomKind::Annulus;
    s.centers = {{0.75, 0.75}};
    s.radii = {0.2};
    s.width = 0.05;
    s.velocity_part = true;
    s.velocity_amplitudes = {-1.0};
    auto p = make_phantom(s, g);
    CHECK(p.u0[g.index(30, 30)] == 0.0);  // centre is a hole
    CHECK(p.u0[g.index(38, 30)] == doctest::Approx(1.0));
    CHECK(p.u1[g.index(38, 30)] == doctest::Approx(-1.0));
  }

  TEST_CASE("energy norm converges under refinement") {
    PhantomSpec s;
    s.kind = PhantomKind::MultiBump;
    s.centers = {{0.3, 0.35}, {0.45, 0.25}};
    s.radii = {0.15, 0.12};
    s.amplitudes = {1.0, -0.5};
    s.velocity_part = true;
    s.velocity_amplitudes = {0.3, 0.2};
    const auto a = corner_setup(0.0125);
    const auto b = corner_setup(0.00625);
    const double ea = energy_norm(make_phantom(s, a.grid), a);
    const double eb = energy_norm(make_phantom(s, b.grid), b);
    CHECK(std::abs(ea - eb) <= 0.01 * eb);
  }

  TEST_CASE("PAT flag") {
    Grid g(41, 41, 0.025);
    PhantomSpec s;
    s.centers = {{0.5, 0.5}};
    s.radii = {0.2};
    auto p = make_phantom(s, g);
    CHECK(pat_even_data(p));
    p.u1[g.index(20, 20)] = 1e-3;
    CHECK_THROWS_AS(pat_even_data(p), Error);
  }
}
