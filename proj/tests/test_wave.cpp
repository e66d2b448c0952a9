#include <doctest.h>

#include <cmath>

#include "npat/error.hpp"
#include "npat/operators.hpp"
#include "npat/phantoms.hpp"
#include "npat/wave.hpp"

using namespace npat;

namespace {

/// Rectangle whose edges are all reflecting walls, optionally with the left edge measuring.
BoundaryMap box_map(const Grid& g, bool left_measures) {
  BoundaryMap b;
  b.cls.assign(g.size(), NodeClass::Interior);
  b.chi0.assign(g.size(), 0.0);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (!g.on_edge(i, j)) continue;
      const auto k = g.index(i, j);
      if (left_measures && i == 0) {
        b.cls[k] = NodeClass::Measurement;
        b.chi0[k] = 1.0;
      } else {
        b.cls[k] = NodeClass::Wall;
      }
    }
  }
  return b;
}

Setup corner(double h, double pad, double T, double cfl = 0.45) {
  auto [g, b] = build_corner_geometry(1.0, pad, h);
  return make_setup(g, SpeedField::constant(g, 1.0), b, T, cfl);
}

StatePair bump(const Grid& g, double cx, double cy, double r, double a0, double a1) {
  PhantomSpec s;
  s.centers = {{cx, cy}};
  s.radii = {r};
  s.amplitudes = {a0};
  s.velocity_part = true;
  s.velocity_amplitudes = {a1};
  return make_phantom(s, g);
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an npat::Error");
  return ErrorKind::InvalidArgument;
}

double l2(const Field& a, const Field& b, double h) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s * h * h);
}

/// Right-moving plane pulse: L2 error against the exact translate after time t.
double plane_pulse_error(double h, double w = 0.4) {
  const int nx = static_cast<int>(std::lround(2.0 / h)) + 1;
  const int ny = static_cast<int>(std::lround(0.5 / h)) + 1;
  Grid g(nx, ny, h);
  const Setup s = make_setup(g, SpeedField::constant(g, 1.0), box_map(g, false), 0.5, 0.45);
  auto f = [w](double x) { return bump_profile((x - 0.6) / w); };
  auto df = [w](double x) {
    const double e = 1e-6;
    return (bump_profile((x + e - 0.6) / w) - bump_profile((x - e - 0.6) / w)) / (2 * e);
  };
  WaveState st{g.zeros(), g.zeros(), 0.0};
  Field exact = g.zeros();
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      st.u[g.index(i, j)] = f(g.x(i));
      st.v[g.index(i, j)] = -df(g.x(i));
      exact[g.index(i, j)] = f(g.x(i) - 0.5);
    }
  }
  const auto r = solve(st, make_solver_config(s.time, Direction::Forward, BcMode::Neumann), s);
  return l2(r.final.u, exact, h);
}

}  // namespace

TEST_SUITE("wavesolver") {
  TEST_CASE("time axis") {
    Grid g(21, 21, 0.05);
    auto c = SpeedField::gradient(g, 1.0, 1.0, 0);
    const TimeAxis t = make_time_axis(g, c, 0.7, 0.45);
    CHECK(t.n_steps * t.dt == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(t.cfl <= 0.45);
    CHECK(t.dt == doctest::Approx(t.cfl * g.h / c.cmax()).epsilon(1e-14));
    CHECK(kind_of([&] { make_time_axis(g, c, 0.7, 0.6); }) == ErrorKind::CflViolation);
    CHECK(kind_of([&] { make_time_axis(g, c, 0.7, 0.0); }) == ErrorKind::CflViolation);
  }

  TEST_CASE("zero state stays zero") {
    const Setup s = corner(0.05, 1.0, 0.4);
    WaveState z{s.grid.zeros(), s.grid.zeros(), 0.0};
    for (auto mode : {BcMode::Neumann, BcMode::ImpedancePlus}) {
      const auto r = solve(z, make_solver_config(s.time, Direction::Forward, mode), s);
      for (double v : r.final.u) CHECK(v == 0.0);
      for (double v : r.trace.values) CHECK(v == 0.0);
      CHECK(r.trace.n_samples() == static_cast<std::size_t>(s.time.n_steps + 1));
    }
  }

  TEST_CASE("constants solve the Neumann problem") {
    Grid g(20, 16, 0.05);
    const Setup s = make_setup(g, SpeedField::gradient(g, 1.0, 0.8, 1), box_map(g, true), 0.5);
    WaveState st{Field(g.size(), 3.25), g.zeros(), 0.0};
    const auto r = solve(st, make_solver_config(s.time, Direction::Forward, BcMode::Neumann), s);
    for (double v : r.final.u) CHECK(v == doctest::Approx(3.25).epsilon(1e-14));
    for (double v : r.final.v) CHECK(std::abs(v) < 1e-12);
  }

  TEST_CASE("plane pulse dispersion is second order") {
    const double e1 = plane_pulse_error(0.01);
    const double e2 = plane_pulse_error(0.005);
    const double ratio = e1 / e2;
    MESSAGE("plane pulse L2 errors " << e1 << " " << e2 << " ratio " << ratio);
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
  }

  TEST_CASE("Neumann solves are reversible") {
    const Setup s = corner(0.025, 1.5, 0.6);
    StatePair u = bump(s.grid, 0.35, 0.3, 0.15, 1.0, 0.5);
    const WaveState st{u.u0, u.u1, 0.0};
    const auto fwd = solve(st, make_solver_config(s.time, Direction::Forward, BcMode::Neumann), s);
    const auto back = solve(fwd.final, make_solver_config(s.time, Direction::Backward, BcMode::Neumann), s);
    CHECK(back.final.t == doctest::Approx(0.0).epsilon(1e-12));
    const StatePair r{back.final.u, back.final.v};
    CHECK(energy_norm(r - u, s) <= 1e-10 * energy_norm(u, s));
  }

  TEST_CASE("finite speed of propagation") {
    for (double h : {0.025, 0.0125}) {
      const Setup s = corner(h, 1.5, 0.3);
      // support edge 0.6 from both arms
      const StatePair u = bump(s.grid, 0.75, 0.75, 0.15, 1.0, 0.0);
      const auto r = solve({u.u0, u.u1, 0.0}, make_solver_config(s.time, Direction::Forward, BcMode::Neumann), s);
      double worst = 0.0;
      for (double v : r.trace.values) worst = std::max(worst, std::abs(v));
      CHECK(worst <= 1e-12 * energy_norm(u, s));
    }
  }

  TEST_CASE("impedance energy never grows") {
    const Setup s = corner(0.025, 1.5, 0.7);
    const StatePair u = bump(s.grid, 0.3, 0.25, 0.15, 1.0, -2.0);
    std::vector<double> e;
    solve({u.u0, u.u1, 0.0}, make_solver_config(s.time, Direction::Forward, BcMode::ImpedancePlus), s,
          [&](const StepInfo& info) { e.push_back(info.energy); });
    REQUIRE(e.size() == static_cast<std::size_t>(s.time.n_steps + 1));
    for (std::size_t n = 1; n < e.size(); ++n) CHECK(e[n] <= e[n - 1] + 1e-12 * e[0]);
    CHECK(e.back() < 0.9 * e.front());

    // backward in time with chi = -chi0 is equally dissipative in the marching direction
    std::vector<double> eb;
    solve({u.u0, u.u1, 0.0}, make_solver_config(s.time, Direction::Backward, BcMode::ImpedanceMinus), s,
          [&](const StepInfo& info) { eb.push_back(info.energy); });
    for (std::size_t n = 1; n < eb.size(); ++n) CHECK(eb[n] <= eb[n - 1] + 1e-12 * eb[0]);
  }

  TEST_CASE("stable at cfl 0.5 with speed contrast 4 over 10 T") {
    Grid g(41, 41, 0.025);
    auto c = SpeedField::gradient(g, 1.0, 3.0, 0);
    for (auto mode : {BcMode::Neumann, BcMode::ImpedancePlus}) {
      const Setup s = make_setup(g, c, box_map(g, true), 5.0, 0.5);
      const StatePair u = bump(g, 0.5, 0.5, 0.2, 1.0, 0.3);
      std::vector<double> e;
      CHECK_NOTHROW(solve({u.u0, u.u1, 0.0}, make_solver_config(s.time, Direction::Forward, mode), s,
                          [&](const StepInfo& info) { e.push_back(info.energy); }));
      // the leapfrog energy is conserved (Neumann) or decays (impedance)
      CHECK(e.back() <= e.front() * (1 + 1e-9));
    }
  }

  TEST_CASE("configuration errors") {
    const Setup s = corner(0.05, 1.0, 0.4);
    WaveState z{s.grid.zeros(), s.grid.zeros(), 0.0};
    CHECK(kind_of([&] {
            solve(z, make_solver_config(s.time, Direction::Backward, BcMode::ImpedancePlus), s);
          }) == ErrorKind::IllPosedBoundary);
    CHECK(kind_of([&] {
            solve(z, make_solver_config(s.time, Direction::Forward, BcMode::ImpedanceMinus), s);
          }) == ErrorKind::IllPosedBoundary);
    SolverConfig bad = make_solver_config(s.time, Direction::Forward, BcMode::Neumann);
    bad.cfl = 0.7;
    CHECK(kind_of([&] { solve(z, bad, s); }) == ErrorKind::CflViolation);
    bad = make_solver_config(s.time, Direction::Forward, BcMode::Neumann);
    bad.dt *= 1.01;
    CHECK(kind_of([&] { solve(z, bad, s); }) == ErrorKind::CflViolation);

    MeasurementTrace drive = solve(z, make_solver_config(s.time, Direction::Forward, BcMode::Neumann), s).trace;
    CHECK(kind_of([&] {
            solve(z, make_solver_config(s.time, Direction::Forward, BcMode::Neumann, &drive), s);
          }) == ErrorKind::DriveMismatch);
    MeasurementTrace wrong = drive;
    wrong.nodes.pop_back();
    wrong.values.resize(wrong.n_nodes() * (s.time.n_steps + 1));
    CHECK(kind_of([&] {
            solve(z, make_solver_config(s.time, Direction::Forward, BcMode::ImpedancePlus, &wrong), s);
          }) == ErrorKind::DriveMismatch);
    MeasurementTrace minus = drive;
    minus.t_start = -s.time.T;
    CHECK(kind_of([&] {
            solve(z, make_solver_config(s.time, Direction::Forward, BcMode::ImpedancePlus, &minus), s);
          }) == ErrorKind::DriveMismatch);
  }

  TEST_CASE("single step matches a one-step solve") {
    const Setup s = corner(0.05, 1.0, 0.4);
    const StatePair u = bump(s.grid, 0.4, 0.4, 0.2, 1.0, 1.0);
    const auto cfg = make_solver_config(s.time, Direction::Forward, BcMode::ImpedancePlus);
    const WaveState a = step({u.u0, u.u1, 0.0}, cfg, s);
    CHECK(a.t == doctest::Approx(s.time.dt));
    SolverConfig one = cfg;
    one.n_steps = 1;
    const WaveState b = solve({u.u0, u.u1, 0.0}, one, s).final;
    CHECK(a.u == b.u);
  }
}
