#include "npat/operators.hpp"

#include <cmath>
#include <sstream>

#include "npat/error.hpp"

namespace npat {

StatePair zero_pair(const Grid& grid) { return {grid.zeros(), grid.zeros()}; }

StatePair operator+(const StatePair& a, const StatePair& b) {
  StatePair out = a;
  axpy(1.0, b, out);
  return out;
}

StatePair operator-(const StatePair& a, const StatePair& b) {
  StatePair out = a;
  axpy(-1.0, b, out);
  return out;
}

StatePair operator*(double s, const StatePair& a) {
  StatePair out = a;
  for (double& x : out.u0) x *= s;
  for (double& x : out.u1) x *= s;
  return out;
}

void axpy(double s, const StatePair& x, StatePair& y) {
  for (std::size_t k = 0; k < y.u0.size(); ++k) y.u0[k] += s * x.u0[k];
  for (std::size_t k = 0; k < y.u1.size(); ++k) y.u1[k] += s * x.u1[k];
}

double energy_inner(const StatePair& a, const StatePair& b, const Setup& setup) {
  return 0.5 * (setup.disc.stiffness_form(a.u0, b.u0) + setup.disc.mass_form(a.u1, b.u1));
}

double energy_norm(const StatePair& a, const Setup& setup) {
  return std::sqrt(std::max(0.0, energy_inner(a, a, setup)));
}

double leapfrog_energy(std::span<const double> u_prev, std::span<const double> u,
                       std::span<const double> u_next, double tau, const Discretization& disc) {
  Field Au(u.size());
  disc.apply_stiffness(u, Au);
  double kin_lo = 0.0, kin_hi = 0.0, pot_lo = 0.0, pot_hi = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (disc.pinned(k)) continue;
    const double dlo = (u[k] - u_prev[k]) / tau;
    const double dhi = (u_next[k] - u[k]) / tau;
    kin_lo += disc.mass(k) * dlo * dlo;
    kin_hi += disc.mass(k) * dhi * dhi;
    pot_lo += u_prev[k] * Au[k];
    pot_hi += u_next[k] * Au[k];
  }
  return 0.25 * (kin_lo + pot_lo + kin_hi + pot_hi);
}

namespace {

WaveState as_state(const StatePair& p, double t) { return {p.u0, p.u1, t}; }
StatePair as_pair(WaveState&& s) { return {std::move(s.u), std::move(s.v)}; }

/// One cycle leg: solve from `start` with the boundary mode that is well posed in `dir`.
WaveState leg(const WaveState& start, Direction dir, const MeasurementTrace* drive, const Setup& setup) {
  const BcMode mode = dir == Direction::Forward ? BcMode::ImpedancePlus : BcMode::ImpedanceMinus;
  return solve(start, make_solver_config(setup.time, dir, mode, drive), setup).final;
}

StatePair averaged_cycle(const StatePair& u0, const Traces* data, const Setup& setup) {
  const MeasurementTrace* plus = data ? &data->plus : nullptr;
  const MeasurementTrace* minus = data ? &data->minus : nullptr;
  // I+: up from t = 0 to T, then down back to 0.
  WaveState a = leg(as_state(u0, 0.0), Direction::Forward, plus, setup);
  StatePair cyc_plus = as_pair(leg(a, Direction::Backward, plus, setup));
  // I-: down from t = 0 to -T, then up back to 0.
  WaveState b = leg(as_state(u0, 0.0), Direction::Backward, minus, setup);
  StatePair cyc_minus = as_pair(leg(b, Direction::Forward, minus, setup));

  StatePair out = zero_pair(setup.grid);
  for (std::size_t k = 0; k < out.u0.size(); ++k) {
    out.u0[k] = 0.5 * (cyc_plus.u0[k] + cyc_minus.u0[k]);
    out.u1[k] = 0.5 * (cyc_plus.u1[k] + cyc_minus.u1[k]);
  }
  return out;
}

void check_pair(const StatePair& p, const Setup& setup) {
  if (p.u0.size() != setup.grid.size() || p.u1.size() != setup.grid.size()) {
    throw Error(ErrorKind::InvalidArgument, "state pair size does not match grid");
  }
}

}  // namespace

void require_interior_support(const StatePair& u, const Setup& setup) {
  check_pair(u, setup);
  const Grid& g = setup.grid;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (!g.on_edge(i, j)) continue;
      const auto k = g.index(i, j);
      if (u.u0[k] != 0.0 || u.u1[k] != 0.0) {
        throw Error(ErrorKind::SupportViolation, "state pair is not supported in the interior");
      }
    }
  }
}

Traces lambda_op(const StatePair& v0, const Setup& setup) {
  check_pair(v0, setup);
  Traces out;
  const WaveState start = as_state(v0, 0.0);
  out.plus = solve(start, make_solver_config(setup.time, Direction::Forward, BcMode::Neumann), setup).trace;
  out.minus = solve(start, make_solver_config(setup.time, Direction::Backward, BcMode::Neumann), setup).trace;
  out.plus.interval = Interval::Plus;
  out.minus.interval = Interval::Minus;
  return out;
}

StatePair nudge_cycle(const StatePair& u0, const Traces& data, const Setup& setup) {
  check_pair(u0, setup);
  return averaged_cycle(u0, &data, setup);
}

StatePair s_cycle(const StatePair& u0, const Setup& setup) {
  check_pair(u0, setup);
  return averaged_cycle(u0, nullptr, setup);
}

StatePair project_K(const StatePair& u, const RegionMask& K, const Setup& setup, double tol,
                    ProjectionStats* stats) {
  check_pair(u, setup);
  const Grid& g = setup.grid;
  const Discretization& disc = setup.disc;
  if (K.mask.size() != g.size()) throw Error(ErrorKind::InvalidArgument, "mask size does not match grid");
  const auto nodes = K.nodes();
  if (nodes.empty()) throw Error(ErrorKind::EmptyMask, "projection region is empty");
  if (K.margin < 1) throw Error(ErrorKind::InteriorViolation, "projection region touches the boundary");

  StatePair out = zero_pair(g);
  for (std::size_t k : nodes) out.u1[k] = u.u1[k];

  // Local numbering of K and the K-restricted stiffness (Dirichlet outside K).
  const std::size_t m = nodes.size();
  std::vector<long> local(g.size(), -1);
  for (std::size_t q = 0; q < m; ++q) local[nodes[q]] = static_cast<long>(q);
  struct Nb {
    long idx[4];
    double w[4];
    double diag;
  };
  std::vector<Nb> nb(m);
  const auto nx = static_cast<std::size_t>(g.nx);
  for (std::size_t q = 0; q < m; ++q) {
    const std::size_t k = nodes[q];
    const std::size_t nbk[4] = {k + 1, k - 1, k + nx, k - nx};
    const double w[4] = {disc.edge_x(k), disc.edge_x(k - 1), disc.edge_y(k), disc.edge_y(k - nx)};
    Nb& e = nb[q];
    e.diag = 0.0;
    for (int s = 0; s < 4; ++s) {
      e.idx[s] = local[nbk[s]];
      e.w[s] = w[s];
      e.diag += w[s];
    }
  }
  auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t q = 0; q < m; ++q) {
      const Nb& e = nb[q];
      double acc = e.diag * x[q];
      for (int s = 0; s < 4; ++s) {
        if (e.idx[s] >= 0) acc -= e.w[s] * x[static_cast<std::size_t>(e.idx[s])];
      }
      y[q] = acc;
    }
  };
  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t q = 0; q < a.size(); ++q) s += a[q] * b[q];
    return s;
  };

  Field Au(g.size());
  disc.apply_stiffness(u.u0, Au);
  std::vector<double> b(m), x(m), r(m), p(m), Ap(m);
  for (std::size_t q = 0; q < m; ++q) {
    b[q] = Au[nodes[q]];
    x[q] = u.u0[nodes[q]];
  }
  const double bnorm = std::sqrt(dot(b, b));
  int iters = 0;
  double rel = 0.0;
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
  } else {
    apply(x, Ap);
    for (std::size_t q = 0; q < m; ++q) r[q] = b[q] - Ap[q];
    p = r;
    double rr = dot(r, r);
    rel = std::sqrt(rr) / bnorm;
    const int max_iter = static_cast<int>(10 * m);
    while (rel > tol) {
      if (iters >= max_iter) {
        std::ostringstream msg;
        msg << "CG reached relative residual " << rel << " after " << iters << " iterations (target " << tol << ")";
        throw Error(ErrorKind::CgDivergence, msg.str());
      }
      apply(p, Ap);
      const double alpha = rr / dot(p, Ap);
      for (std::size_t q = 0; q < m; ++q) {
        x[q] += alpha * p[q];
        r[q] -= alpha * Ap[q];
      }
      const double rr_new = dot(r, r);
      const double beta = rr_new / rr;
      rr = rr_new;
      for (std::size_t q = 0; q < m; ++q) p[q] = r[q] + beta * p[q];
      rel = std::sqrt(rr) / bnorm;
      ++iters;
    }
  }
  for (std::size_t q = 0; q < m; ++q) out.u0[nodes[q]] = x[q];
  if (stats != nullptr) {
    stats->iterations = iters;
    stats->relative_residual = rel;
  }
  return out;
}

FluxTrace boundary_flux_trace(const StatePair& u0, const Setup& setup) {
  require_interior_support(u0, setup);
  const WaveState start = as_state(u0, 0.0);
  const auto up = solve(start, make_solver_config(setup.time, Direction::Forward, BcMode::ImpedancePlus), setup).trace;
  const auto down =
      solve(start, make_solver_config(setup.time, Direction::Backward, BcMode::ImpedanceMinus), setup).trace;

  FluxTrace out;
  out.dt = setup.time.dt;
  out.t_start = -setup.time.T;
  out.nodes = setup.measurement;
  const std::size_t nn = out.nodes.size();
  const std::size_t N = static_cast<std::size_t>(setup.time.n_steps);
  out.values.assign((2 * N + 1) * nn, 0.0);
  std::vector<double> root(nn);
  for (std::size_t m = 0; m < nn; ++m) root[m] = std::sqrt(setup.boundary.chi0[out.nodes[m]]);
  // samples 0..N from the backward leg (times -T..0), N+1..2N from the forward leg
  for (std::size_t k = 0; k <= N; ++k) {
    auto s = down.sample(k);
    for (std::size_t m = 0; m < nn; ++m) out.values[k * nn + m] = root[m] * s[m];
  }
  for (std::size_t k = 1; k <= N; ++k) {
    auto s = up.sample(k);
    for (std::size_t m = 0; m < nn; ++m) out.values[(N + k) * nn + m] = root[m] * s[m];
  }
  return out;
}

double flux_norm_squared(const FluxTrace& trace, const Setup& setup) {
  const std::size_t nn = trace.nodes.size();
  const std::size_t ns = trace.n_samples();
  double total = 0.0;
  for (std::size_t k = 0; k < ns; ++k) {
    const double wt = (k == 0 || k + 1 == ns) ? 0.5 : 1.0;
    double s = 0.0;
    for (std::size_t m = 0; m < nn; ++m) {
      const double e = trace.values[k * nn + m];
      s += setup.grid.h / setup.speed[trace.nodes[m]] * e * e;
    }
    total += wt * trace.dt * s;
  }
  return total;
}

std::vector<AuditRow> energy_audit(const StatePair& v0, const Setup& setup) {
  check_pair(v0, setup);
  std::vector<AuditRow> rows;
  double flux = 0.0;
  double prev_rate = 0.0;
  auto observe = [&](const StepInfo& s) {
    AuditRow r;
    r.step = s.n;
    r.time = s.t;
    r.energy = s.energy;
    r.energy_star = 0.5 * (setup.disc.stiffness_form(s.u, s.u) + setup.disc.mass_form(s.v, s.v));
    if (s.n > 0) flux += 0.5 * setup.time.dt * (prev_rate + s.flux_rate);
    prev_rate = s.flux_rate;
    r.flux = flux;
    const double e0 = rows.empty() ? r.energy_star : rows.front().energy_star;
    r.balance_residual = std::abs(r.energy_star - e0 + flux);
    rows.push_back(r);
  };
  const auto config = make_solver_config(setup.time, Direction::Forward, BcMode::ImpedancePlus);
  solve({v0.u0, v0.u1, 0.0}, config, setup, observe);
  return rows;
}

}  // namespace npat
