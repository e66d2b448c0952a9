#include "npat/wave.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "npat/error.hpp"

namespace npat {

Discretization::Discretization(const Grid& grid, const SpeedField& speed, const BoundaryMap& bmap)
    : grid_(grid) {
  validate_boundary_map(grid, bmap);
  const std::size_t n = grid.size();
  mass_.assign(n, 0.0);
  damping_.assign(n, 0.0);
  edge_x_.assign(n, 0.0);
  edge_y_.assign(n, 0.0);
  pinned_.assign(n, 0);
  const double h = grid.h;

  for (int j = 0; j < grid.ny; ++j) {
    const bool jedge = (j == 0 || j == grid.ny - 1);
    for (int i = 0; i < grid.nx; ++i) {
      const bool iedge = (i == 0 || i == grid.nx - 1);
      const auto k = grid.index(i, j);
      const double c = speed[k];
      const double w = (iedge ? 0.5 : 1.0) * (jedge ? 0.5 : 1.0);
      mass_[k] = w * h * h / (c * c);
      if (i + 1 < grid.nx) edge_x_[k] = jedge ? 0.5 : 1.0;
      if (j + 1 < grid.ny) edge_y_[k] = iedge ? 0.5 : 1.0;
      if (bmap.cls[k] == NodeClass::Truncation) pinned_[k] = 1;
      if (bmap.cls[k] == NodeClass::Measurement && bmap.chi0[k] > 0.0) {
        damping_[k] = h * bmap.chi0[k] / c;
        damped_.push_back(k);
      }
    }
  }
}

void Discretization::apply_stiffness(std::span<const double> u, std::span<double> out) const {
  const int nx = grid_.nx;
  const int ny = grid_.ny;
  const double* ex = edge_x_.data();
  const double* ey = edge_y_.data();
  const std::uint8_t* pin = pinned_.data();
  auto val = [&](std::size_t k) { return pin[k] ? 0.0 : u[k]; };

#pragma omp parallel for schedule(static)
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * nx + i;
      if (pin[k]) {
        out[k] = 0.0;
        continue;
      }
      const double uk = u[k];
      double acc = 0.0;
      if (i + 1 < nx) acc += ex[k] * (uk - val(k + 1));
      if (i > 0) acc += ex[k - 1] * (uk - val(k - 1));
      if (j + 1 < ny) acc += ey[k] * (uk - val(k + nx));
      if (j > 0) acc += ey[k - nx] * (uk - val(k - nx));
      out[k] = acc;
    }
  }
}

double Discretization::stiffness_form(std::span<const double> u, std::span<const double> w) const {
  const int nx = grid_.nx;
  const int ny = grid_.ny;
  auto uv = [&](std::size_t k) { return pinned_[k] ? 0.0 : u[k]; };
  auto wv = [&](std::size_t k) { return pinned_[k] ? 0.0 : w[k]; };
  double sum = 0.0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * nx + i;
      if (i + 1 < nx) sum += edge_x_[k] * (uv(k) - uv(k + 1)) * (wv(k) - wv(k + 1));
      if (j + 1 < ny) sum += edge_y_[k] * (uv(k) - uv(k + nx)) * (wv(k) - wv(k + nx));
    }
  }
  return sum;
}

double Discretization::mass_form(std::span<const double> u, std::span<const double> w) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < mass_.size(); ++k) {
    if (!pinned_[k]) sum += mass_[k] * u[k] * w[k];
  }
  return sum;
}

TimeAxis make_time_axis(const Grid& grid, const SpeedField& speed, double T, double cfl) {
  if (!(T > 0.0) || !std::isfinite(T)) throw Error(ErrorKind::InvalidArgument, "T must be positive");
  if (!(cfl > 0.0) || cfl > kMaxCfl) {
    std::ostringstream msg;
    msg << "cfl=" << cfl << " outside (0, " << kMaxCfl << "]";
    throw Error(ErrorKind::CflViolation, msg.str());
  }
  const double dt_max = cfl * grid.h / speed.cmax();
  TimeAxis axis;
  axis.T = T;
  axis.n_steps = static_cast<int>(std::ceil(T / dt_max - 1e-9));
  axis.n_steps = std::max(axis.n_steps, 1);
  axis.dt = T / axis.n_steps;
  axis.cfl = axis.dt * speed.cmax() / grid.h;
  return axis;
}

Setup make_setup(Grid grid, SpeedField speed, BoundaryMap boundary, double T, double cfl) {
  Setup s;
  s.time = make_time_axis(grid, speed, T, cfl);
  s.disc = Discretization(grid, speed, boundary);
  s.measurement = boundary.measurement_nodes();
  s.grid = std::move(grid);
  s.speed = std::move(speed);
  s.boundary = std::move(boundary);
  return s;
}

SolverConfig make_solver_config(const TimeAxis& time, Direction direction, BcMode mode,
                                const MeasurementTrace* drive) {
  SolverConfig cfg;
  cfg.dt = time.dt;
  cfg.n_steps = time.n_steps;
  cfg.cfl = time.cfl;
  cfg.direction = direction;
  cfg.bc_mode = mode;
  cfg.drive = drive;
  return cfg;
}

namespace {

void validate_config(const SolverConfig& cfg, const Setup& setup) {
  if (!(cfg.cfl > 0.0) || cfg.cfl > kMaxCfl * (1.0 + 1e-12)) {
    throw Error(ErrorKind::CflViolation, "Courant number outside (0, 0.5]");
  }
  const double expect = cfg.cfl * setup.grid.h / setup.speed.cmax();
  if (!(cfg.dt > 0.0) || std::abs(cfg.dt - expect) > 1e-9 * expect) {
    throw Error(ErrorKind::CflViolation, "dt does not equal cfl*h/cmax");
  }
  if (cfg.n_steps < 1) throw Error(ErrorKind::InvalidArgument, "n_steps must be positive");
  if (cfg.bc_mode == BcMode::ImpedancePlus && cfg.direction != Direction::Forward) {
    throw Error(ErrorKind::IllPosedBoundary, "chi = +chi0 is only well posed forward in time");
  }
  if (cfg.bc_mode == BcMode::ImpedanceMinus && cfg.direction != Direction::Backward) {
    throw Error(ErrorKind::IllPosedBoundary, "chi = -chi0 is only well posed backward in time");
  }
  if (cfg.drive != nullptr && cfg.bc_mode == BcMode::Neumann) {
    throw Error(ErrorKind::DriveMismatch, "a drive trace requires an impedance boundary mode");
  }
}

struct DriveLookup {
  const MeasurementTrace* trace = nullptr;
  double dt = 0.0;

  void check(const Setup& setup, double t0, double t1) const {
    if (trace == nullptr) return;
    if (trace->nodes != setup.measurement) {
      throw Error(ErrorKind::DriveMismatch, "drive trace node map differs from the boundary map");
    }
    if (std::abs(trace->dt - dt) > 1e-12 * dt) {
      throw Error(ErrorKind::DriveMismatch, "drive trace time step differs from the solver's");
    }
    const double lo = std::min(t0, t1);
    const double hi = std::max(t0, t1);
    const double first = trace->t_start;
    const double last = trace->t_start + (static_cast<double>(trace->n_samples()) - 1.0) * trace->dt;
    if (lo < first - 0.5 * dt || hi > last + 0.5 * dt) {
      throw Error(ErrorKind::DriveMismatch, "drive trace does not cover the solve interval");
    }
  }

  std::span<const double> at(double t) const {
    const double pos = (t - trace->t_start) / dt;
    const auto k = static_cast<std::size_t>(std::llround(pos));
    return trace->sample(k);
  }
};

}  // namespace

SolveResult solve(const WaveState& start, const SolverConfig& config, const Setup& setup,
                  const StepObserver& observer) {
  validate_config(config, setup);
  const Grid& grid = setup.grid;
  const Discretization& disc = setup.disc;
  const std::size_t n = grid.size();
  if (start.u.size() != n || start.v.size() != n) {
    throw Error(ErrorKind::InvalidArgument, "initial state size does not match grid");
  }

  const double sigma = config.direction == Direction::Forward ? 1.0 : -1.0;
  const double tau = config.dt;
  const int N = config.n_steps;
  const double t0 = start.t;
  const bool damped = config.bc_mode != BcMode::Neumann;

  DriveLookup drive{config.drive, tau};
  drive.check(setup, t0, t0 + sigma * N * tau);

  // Boundary nodes carrying the impedance term, with their drive column.
  const auto& meas = setup.measurement;
  std::vector<std::size_t> dnode;
  std::vector<std::size_t> dcol;
  std::vector<double> dgamma;
  if (damped) {
    for (std::size_t m = 0; m < meas.size(); ++m) {
      const std::size_t k = meas[m];
      if (disc.damping(k) > 0.0) {
        dnode.push_back(k);
        dcol.push_back(m);
        dgamma.push_back(disc.damping(k) * tau / (2.0 * disc.mass(k)));
      }
    }
  }
  auto drive_at = [&](int level, std::size_t idx) {
    if (config.drive == nullptr) return 0.0;
    return drive.at(t0 + sigma * level * tau)[dcol[idx]];
  };

  Field u(n), u_prev(n), u_next(n), Au(n), v(n);
  for (std::size_t k = 0; k < n; ++k) {
    u[k] = disc.pinned(k) ? 0.0 : start.u[k];
  }

  // Start level: u^{-1} = u - tau*vf + tau^2/2 * a, with vf the velocity in marching time.
  disc.apply_stiffness(u, Au);
  for (std::size_t k = 0; k < n; ++k) {
    if (disc.pinned(k)) {
      u_prev[k] = 0.0;
      continue;
    }
    const double vf = sigma * start.v[k];
    const double a = -Au[k] / disc.mass(k);
    u_prev[k] = u[k] - tau * vf + 0.5 * tau * tau * a;
  }
  for (std::size_t q = 0; q < dnode.size(); ++q) {
    const std::size_t k = dnode[q];
    const double vf = sigma * start.v[k];
    const double a = -(Au[k] + disc.damping(k) * (vf - sigma * drive_at(0, q))) / disc.mass(k);
    u_prev[k] = u[k] - tau * vf + 0.5 * tau * tau * a;
  }

  SolveResult result;
  MeasurementTrace& trace = result.trace;
  trace.dt = tau;
  trace.nodes = meas;
  trace.values.assign(static_cast<std::size_t>(N + 1) * meas.size(), 0.0);
  trace.t_start = std::min(t0, t0 + sigma * N * tau);
  trace.interval = (trace.t_start + 0.5 * N * tau) >= 0.0 ? Interval::Plus : Interval::Minus;

  const bool track_energy = static_cast<bool>(observer) || (config.energy_guard && config.drive == nullptr);
  double energy_first = 0.0;
  double energy_last = 0.0;

  for (int level = 0; level <= N; ++level) {
    disc.apply_stiffness(u, Au);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t kk = 0; kk < static_cast<std::ptrdiff_t>(n); ++kk) {
      const auto k = static_cast<std::size_t>(kk);
      if (disc.pinned(k)) {
        u_next[k] = 0.0;
      } else {
        u_next[k] = 2.0 * u[k] - u_prev[k] - tau * tau * Au[k] / disc.mass(k);
      }
    }
    for (std::size_t q = 0; q < dnode.size(); ++q) {
      const std::size_t k = dnode[q];
      const double g = dgamma[q];
      u_next[k] = (u_next[k] + g * u_prev[k] + 2.0 * g * tau * sigma * drive_at(level, q)) / (1.0 + g);
    }

    bool finite = true;
    for (std::size_t k = 0; k < n; ++k) {
      v[k] = sigma * (u_next[k] - u_prev[k]) / (2.0 * tau);
      finite = finite && std::isfinite(u_next[k]);
    }
    if (!finite) {
      std::ostringstream msg;
      msg << "non-finite value after time level " << level;
      throw Error(ErrorKind::NonFiniteField, msg.str());
    }

    const std::size_t sample = config.direction == Direction::Forward ? level : N - level;
    auto out = trace.sample(sample);
    for (std::size_t m = 0; m < meas.size(); ++m) out[m] = v[meas[m]];

    if (track_energy) {
      // E^{n-1/2} and E^{n+1/2} both follow from A u^n since A is symmetric.
      double kin_lo = 0.0, kin_hi = 0.0, pot_lo = 0.0, pot_hi = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (disc.pinned(k)) continue;
        const double dlo = (u[k] - u_prev[k]) / tau;
        const double dhi = (u_next[k] - u[k]) / tau;
        kin_lo += disc.mass(k) * dlo * dlo;
        kin_hi += disc.mass(k) * dhi * dhi;
        pot_lo += u_prev[k] * Au[k];
        pot_hi += u_next[k] * Au[k];
      }
      const double e_lo = 0.5 * (kin_lo + pot_lo);
      const double e_hi = 0.5 * (kin_hi + pot_hi);
      const double energy = 0.5 * (e_lo + e_hi);
      if (level == 0) energy_first = energy;
      if (config.energy_guard && config.drive == nullptr && level > 0 &&
          energy > energy_last + 1e-9 * std::max(energy_first, 1e-300) &&
          energy > 1e-300) {
        std::ostringstream msg;
        msg << "leapfrog energy grew at level " << level << " (" << energy_last << " -> " << energy
            << "); scheme unstable";
        throw Error(ErrorKind::NonFiniteField, msg.str());
      }
      energy_last = energy;
      if (observer) {
        double flux = 0.0;
        for (std::size_t k : disc.damped_nodes()) {
          if (damped) flux += disc.damping(k) * v[k] * v[k];
        }
        StepInfo info;
        info.n = level;
        info.t = t0 + sigma * level * tau;
        info.u_prev = u_prev;
        info.u = u;
        info.u_next = u_next;
        info.v = v;
        info.energy = energy;
        info.flux_rate = flux;
        observer(info);
      }
    }

    if (level == N) break;
    std::swap(u_prev, u);
    std::swap(u, u_next);
  }

  result.final.u = std::move(u);
  result.final.v = std::move(v);
  result.final.t = t0 + sigma * N * tau;
  return result;
}

WaveState step(const WaveState& state, const SolverConfig& config, const Setup& setup) {
  SolverConfig one = config;
  one.n_steps = 1;
  return solve(state, one, setup).final;
}

}  // namespace npat
