#include "npat/rays.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "npat/error.hpp"

namespace npat {

const char* to_string(RayOutcome o) {
  switch (o) {
    case RayOutcome::Visible: return "Visible";
    case RayOutcome::HitWall: return "HitWall";
    case RayOutcome::Tangential: return "Tangential";
    case RayOutcome::Trapped: return "Trapped";
  }
  return "?";
}

SpeedModel SpeedModel::from_grid(const Grid& grid, const SpeedField& speed) {
  if (grid.nx < 3 || grid.ny < 3) throw Error(ErrorKind::InvalidArgument, "ray tracing needs at least 3x3 nodes");
  SpeedModel m;
  m.grid_ = grid;
  // c^2 on the nodes plus one ghost layer from cubic extrapolation (exact for quadratics).
  const int px = grid.nx + 2, py = grid.ny + 2;
  m.c2_.assign(static_cast<std::size_t>(px) * py, 0.0);
  auto at = [&](int i, int j) -> double& { return m.c2_[static_cast<std::size_t>(j + 1) * px + (i + 1)]; };
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) at(i, j) = speed[grid.index(i, j)] * speed[grid.index(i, j)];
  for (int j = 0; j < grid.ny; ++j) {
    at(-1, j) = 3 * at(0, j) - 3 * at(1, j) + at(2, j);
    const int e = grid.nx - 1;
    at(e + 1, j) = 3 * at(e, j) - 3 * at(e - 1, j) + at(e - 2, j);
  }
  for (int i = -1; i <= grid.nx; ++i) {
    at(i, -1) = 3 * at(i, 0) - 3 * at(i, 1) + at(i, 2);
    const int e = grid.ny - 1;
    at(i, e + 1) = 3 * at(i, e) - 3 * at(i, e - 1) + at(i, e - 2);
  }
  double gmax = 0.0;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const double gx = (at(i + 1, j) - at(i - 1, j)) / (2.0 * grid.h);
      const double gy = (at(i, j + 1) - at(i, j - 1)) / (2.0 * grid.h);
      gmax = std::max(gmax, std::hypot(gx, gy) / (2.0 * speed[grid.index(i, j)]));
    }
  }
  m.cmax_ = speed.cmax();
  m.max_grad_c_ = gmax;
  return m;
}

SpeedModel SpeedModel::analytic(Eval eval, double cmax, double max_grad_c) {
  SpeedModel m;
  m.analytic_ = std::move(eval);
  m.cmax_ = cmax;
  m.max_grad_c_ = max_grad_c;
  return m;
}

void SpeedModel::eval(double x, double y, double& c2, Vec2& g) const {
  if (analytic_) {
    analytic_(x, y, c2, g);
    return;
  }
  // Keys cubic convolution: C1, reproduces quadratics, and its derivative at a node is the
  // centered difference. The gradient is the exact derivative of the interpolant, so the ray
  // flow conserves |xi| c up to the integrator error.
  const double fx = std::clamp((x - grid_.x0) / grid_.h, 0.0, static_cast<double>(grid_.nx - 1));
  const double fy = std::clamp((y - grid_.y0) / grid_.h, 0.0, static_cast<double>(grid_.ny - 1));
  const int i = std::min(static_cast<int>(fx), grid_.nx - 2);
  const int j = std::min(static_cast<int>(fy), grid_.ny - 2);
  double wx[4], dx[4], wy[4], dy[4];
  auto weights = [](double t, double* w, double* d) {
    const double t2 = t * t, t3 = t2 * t;
    w[0] = 0.5 * (-t3 + 2 * t2 - t);
    w[1] = 0.5 * (3 * t3 - 5 * t2 + 2);
    w[2] = 0.5 * (-3 * t3 + 4 * t2 + t);
    w[3] = 0.5 * (t3 - t2);
    d[0] = 0.5 * (-3 * t2 + 4 * t - 1);
    d[1] = 0.5 * (9 * t2 - 10 * t);
    d[2] = 0.5 * (-9 * t2 + 8 * t + 1);
    d[3] = 0.5 * (3 * t2 - 2 * t);
  };
  weights(fx - i, wx, dx);
  weights(fy - j, wy, dy);
  const std::size_t px = static_cast<std::size_t>(grid_.nx) + 2;
  double v = 0.0, vx = 0.0, vy = 0.0;
  for (int b = 0; b < 4; ++b) {
    const double* row = c2_.data() + static_cast<std::size_t>(j + b) * px + static_cast<std::size_t>(i);
    double r = 0.0, rx = 0.0;
    for (int a = 0; a < 4; ++a) {
      r += wx[a] * row[a];
      rx += dx[a] * row[a];
    }
    v += wy[b] * r;
    vx += wy[b] * rx;
    vy += dy[b] * r;
  }
  c2 = v;
  g.x = vx / grid_.h;
  g.y = vy / grid_.h;
}

namespace {

struct Phase {
  double x, y, px, py;
};

Phase rhs(const Phase& s, const SpeedModel& speed) {
  double c2;
  Vec2 g;
  speed.eval(s.x, s.y, c2, g);
  const double p2 = s.px * s.px + s.py * s.py;
  return {c2 * s.px, c2 * s.py, -0.5 * g.x * p2, -0.5 * g.y * p2};
}

Phase rk4(const Phase& s, double dt, const SpeedModel& speed) {
  auto add = [](const Phase& a, const Phase& b, double f) {
    return Phase{a.x + f * b.x, a.y + f * b.y, a.px + f * b.px, a.py + f * b.py};
  };
  const Phase k1 = rhs(s, speed);
  const Phase k2 = rhs(add(s, k1, 0.5 * dt), speed);
  const Phase k3 = rhs(add(s, k2, 0.5 * dt), speed);
  const Phase k4 = rhs(add(s, k3, dt), speed);
  return {s.x + dt / 6.0 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x),
          s.y + dt / 6.0 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y),
          s.px + dt / 6.0 * (k1.px + 2 * k2.px + 2 * k3.px + k4.px),
          s.py + dt / 6.0 * (k1.py + 2 * k2.py + 2 * k3.py + k4.py)};
}

/// Amount by which a point lies outside the grid rectangle (0 when inside).
double outside(const Grid& g, double x, double y) {
  return std::max({g.x0 - x, x - g.xmax(), g.y0 - y, y - g.ymax(), 0.0});
}

}  // namespace

RayHit trace_ray(Vec2 x0, Vec2 dir, double T, const Grid& grid, const BoundaryMap& bmap,
                 const SpeedModel& speed, const RayOptions& opts) {
  if (outside(grid, x0.x, x0.y) > 0.0) throw Error(ErrorKind::InvalidArgument, "ray start lies outside the grid");
  const double dn = std::hypot(dir.x, dir.y);
  if (!(dn > 0.0)) throw Error(ErrorKind::InvalidArgument, "ray direction must be nonzero");

  double c2;
  Vec2 g;
  speed.eval(x0.x, x0.y, c2, g);
  const double c0 = std::sqrt(c2);
  Phase s{x0.x, x0.y, dir.x / (dn * c0), dir.y / (dn * c0)};

  double dt = opts.step;
  if (!(dt > 0.0)) {
    dt = grid.h / speed.cmax();
    if (speed.max_grad_c() > 0.0) dt = std::min(dt, 0.1 / speed.max_grad_c());
    dt *= opts.safety;
  }

  RayHit hit;
  double t = 0.0;
  auto drift_of = [&](const Phase& p) {
    double cc;
    Vec2 gg;
    speed.eval(p.x, p.y, cc, gg);
    return std::abs(std::hypot(p.px, p.py) * std::sqrt(cc) - 1.0);
  };
  auto finish = [&](const Phase& p, double time) {
    hit.state.x = {p.x, p.y};
    hit.state.xi = {p.px, p.py};
    hit.state.t = time;
  };

  while (t < T) {
    const double h_step = std::min(dt, T - t);
    Phase next = rk4(s, h_step, speed);
    if (!std::isfinite(next.x) || !std::isfinite(next.y) || !std::isfinite(next.px) || !std::isfinite(next.py)) {
      throw Error(ErrorKind::NonFiniteRay, "ray integration produced a non-finite state");
    }
    if (outside(grid, next.x, next.y) > 0.0) {
      double lo = 0.0, hi = h_step;
      const double tol = 1e-6 * grid.h / speed.cmax();
      for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const Phase pm = rk4(s, mid, speed);
        (outside(grid, pm.x, pm.y) > 0.0 ? hi : lo) = mid;
      }
      Phase p = rk4(s, hi, speed);
      hit.slowness_drift = std::max(hit.slowness_drift, drift_of(p));
      // Which side: the one the point overshoots most.
      const double over[4] = {grid.x0 - p.x, p.x - grid.xmax(), grid.y0 - p.y, p.y - grid.ymax()};
      const int side = static_cast<int>(std::max_element(over, over + 4) - over);
      const Vec2 normal[4] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
      p.x = std::clamp(p.x, grid.x0, grid.xmax());
      p.y = std::clamp(p.y, grid.y0, grid.ymax());
      finish(p, t + hi);

      int i, j;
      if (side < 2) {
        i = side == 0 ? 0 : grid.nx - 1;
        j = std::clamp(static_cast<int>(std::lround((p.y - grid.y0) / grid.h)), 0, grid.ny - 1);
      } else {
        j = side == 2 ? 0 : grid.ny - 1;
        i = std::clamp(static_cast<int>(std::lround((p.x - grid.x0) / grid.h)), 0, grid.nx - 1);
      }
      hit.node = grid.index(i, j);
      const double vx = p.px, vy = p.py;  // velocity is parallel to xi
      hit.cos_incidence = std::abs(vx * normal[side].x + vy * normal[side].y) / std::hypot(vx, vy);
      const bool measuring = bmap.cls[hit.node] == NodeClass::Measurement && bmap.chi0[hit.node] > 0.0;
      if (!measuring) {
        hit.outcome = RayOutcome::HitWall;
      } else {
        hit.outcome = hit.cos_incidence >= opts.tangency ? RayOutcome::Visible : RayOutcome::Tangential;
      }
      return hit;
    }
    s = next;
    t += h_step;
    hit.slowness_drift = std::max(hit.slowness_drift, drift_of(s));
  }
  finish(s, t);
  hit.outcome = RayOutcome::Trapped;
  return hit;
}

namespace {

int rank(RayOutcome o) {
  switch (o) {
    case RayOutcome::Visible: return 3;
    case RayOutcome::Tangential: return 2;
    case RayOutcome::HitWall: return 1;
    case RayOutcome::Trapped: return 0;
  }
  return 0;
}

VisibilityRecord visibility_of(std::size_t node, int d, int n_dirs, double T, const Grid& grid,
                               const BoundaryMap& bmap, const SpeedModel& speed, const RayOptions& opts) {
  const double theta = 2.0 * std::numbers::pi * d / n_dirs;
  const Vec2 x0{grid.x(grid.col(node)), grid.y(grid.row(node))};
  const Vec2 dir{std::cos(theta), std::sin(theta)};
  RayHit best = trace_ray(x0, dir, T, grid, bmap, speed, opts);
  if (best.outcome != RayOutcome::Visible) {
    RayHit back = trace_ray(x0, {-dir.x, -dir.y}, T, grid, bmap, speed, opts);
    if (rank(back.outcome) > rank(best.outcome)) best = back;
  }
  VisibilityRecord r;
  r.node = node;
  r.dir_index = d;
  r.outcome = best.outcome;
  r.hit_time = best.outcome == RayOutcome::Trapped ? T : best.state.t;
  r.cos_incidence = best.outcome == RayOutcome::Trapped ? 0.0 : best.cos_incidence;
  r.hit = best.state.x;
  return r;
}

}  // namespace

VisibilityReport check_visibility(const RegionMask& K, double T, int n_dirs, const Grid& grid,
                                  const BoundaryMap& bmap, const SpeedModel& speed, const RayOptions& opts) {
  if (n_dirs < 8) throw Error(ErrorKind::InvalidArgument, "n_dirs must be at least 8");
  const auto nodes = K.nodes();
  if (nodes.empty()) throw Error(ErrorKind::EmptyMask, "visibility check needs a nonempty region");

  VisibilityReport rep;
  rep.tangency = opts.tangency;
  rep.n_dirs = n_dirs;
  rep.records.resize(nodes.size() * static_cast<std::size_t>(n_dirs));
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t q = 0; q < static_cast<std::ptrdiff_t>(nodes.size()); ++q) {
    for (int d = 0; d < n_dirs; ++d) {
      rep.records[static_cast<std::size_t>(q) * n_dirs + d] =
          visibility_of(nodes[static_cast<std::size_t>(q)], d, n_dirs, T, grid, bmap, speed, opts);
    }
  }
  std::size_t visible = 0;
  rep.min_visible_cos = 1.0;
  for (const auto& r : rep.records) {
    if (r.outcome != RayOutcome::Visible) continue;
    ++visible;
    rep.min_visible_cos = std::min(rep.min_visible_cos, r.cos_incidence);
    rep.max_visible_time = std::max(rep.max_visible_time, r.hit_time);
  }
  if (visible == 0) rep.min_visible_cos = 0.0;
  rep.fraction = static_cast<double>(visible) / static_cast<double>(rep.records.size());
  rep.pass = visible == rep.records.size();
  return rep;
}

Field visibility_heatmap(double T, int n_dirs, const Grid& grid, const BoundaryMap& bmap,
                         const SpeedModel& speed, const RayOptions& opts) {
  if (n_dirs < 8) throw Error(ErrorKind::InvalidArgument, "n_dirs must be at least 8");
  Field frac(grid.size(), 0.0);
#pragma omp parallel for schedule(dynamic)
  for (int j = 1; j < grid.ny - 1; ++j) {
    for (int i = 1; i < grid.nx - 1; ++i) {
      const auto k = grid.index(i, j);
      int visible = 0;
      for (int d = 0; d < n_dirs; ++d) {
        if (visibility_of(k, d, n_dirs, T, grid, bmap, speed, opts).outcome == RayOutcome::Visible) ++visible;
      }
      frac[k] = static_cast<double>(visible) / n_dirs;
    }
  }
  return frac;
}

void write_visibility_csv(std::ostream& os, const VisibilityReport& report, const Grid& grid) {
  os << "x,y,dir_index,outcome,hit_time,cos_incidence\n";
  char buf[256];
  for (const auto& r : report.records) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d,%s,%.17g,%.17g\n", grid.x(grid.col(r.node)),
                  grid.y(grid.row(r.node)), r.dir_index, to_string(r.outcome), r.hit_time, r.cos_incidence);
    os << buf;
  }
}

}  // namespace npat
