#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "npat/geometry.hpp"

namespace npat {

/// Finite-volume view of the grid operators shared by the solver and the energy
/// space: lumped mass M_i = w_i h^2 / c_i^2 (w = 1, 1/2 on edges, 1/4 at corners),
/// edge-weighted stiffness A (weight 1/2 for edges lying along the boundary) and the
/// boundary damping coefficient h*chi0/c. With this choice the mirror-ghost
/// Neumann stencil and the 5-point Laplacian coincide with M^{-1} A.
class Discretization {
 public:
  Discretization() = default;
  Discretization(const Grid& grid, const SpeedField& speed, const BoundaryMap& bmap);

  const Grid& grid() const { return grid_; }
  double mass(std::size_t k) const { return mass_[k]; }
  double damping(std::size_t k) const { return damping_[k]; }
  bool pinned(std::size_t k) const { return pinned_[k] != 0; }
  const std::vector<std::size_t>& damped_nodes() const { return damped_; }
  double edge_x(std::size_t k) const { return edge_x_[k]; }
  double edge_y(std::size_t k) const { return edge_y_[k]; }

  /// out = A u on free nodes, 0 on pinned nodes. Pointwise; safe to run threaded.
  void apply_stiffness(std::span<const double> u, std::span<double> out) const;
  /// sum_e w_e (u_a - u_b)(w_a - w_b), fixed summation order.
  double stiffness_form(std::span<const double> u, std::span<const double> w) const;
  /// sum_i M_i u_i w_i over free nodes, fixed summation order.
  double mass_form(std::span<const double> u, std::span<const double> w) const;

 private:
  Grid grid_;
  Field mass_;
  Field damping_;
  Field edge_x_;  // weight of edge (i,j)-(i+1,j)
  Field edge_y_;  // weight of edge (i,j)-(i,j+1)
  std::vector<std::uint8_t> pinned_;
  std::vector<std::size_t> damped_;
};

struct TimeAxis {
  double T = 0.0;
  double dt = 0.0;
  int n_steps = 0;
  /// Effective Courant number dt*cmax/h (never above the requested one).
  double cfl = 0.0;
};

/// Picks n_steps = ceil(T*cmax/(cfl*h)) and dt = T/n_steps so n_steps*dt = T.
TimeAxis make_time_axis(const Grid& grid, const SpeedField& speed, double T, double cfl);

/// Everything a solve needs besides the initial data.
struct Setup {
  Grid grid;
  SpeedField speed;
  BoundaryMap boundary;
  TimeAxis time;
  Discretization disc;
  std::vector<std::size_t> measurement;
};

Setup make_setup(Grid grid, SpeedField speed, BoundaryMap boundary, double T, double cfl = 0.45);

enum class Direction { Forward, Backward };
enum class BcMode { Neumann, ImpedancePlus, ImpedanceMinus };
enum class Interval { Plus, Minus };

struct WaveState {
  Field u;
  Field v;
  double t = 0.0;
};

/// Boundary velocity samples on the Measurement nodes, stored in chronological order:
/// sample k belongs to time t_start + k*dt.
struct MeasurementTrace {
  double dt = 0.0;
  double t_start = 0.0;
  Interval interval = Interval::Plus;
  std::vector<std::size_t> nodes;
  std::vector<double> values;

  std::size_t n_nodes() const { return nodes.size(); }
  std::size_t n_samples() const { return nodes.empty() ? 0 : values.size() / nodes.size(); }
  std::span<const double> sample(std::size_t k) const {
    return {values.data() + k * nodes.size(), nodes.size()};
  }
  std::span<double> sample(std::size_t k) { return {values.data() + k * nodes.size(), nodes.size()}; }
};

struct SolverConfig {
  double dt = 0.0;
  int n_steps = 0;
  double cfl = 0.0;
  Direction direction = Direction::Forward;
  BcMode bc_mode = BcMode::Neumann;
  const MeasurementTrace* drive = nullptr;
  /// Abort when the leapfrog energy of an undriven solve grows (instability guard).
  bool energy_guard = true;
};

inline constexpr double kMaxCfl = 0.5;

SolverConfig make_solver_config(const TimeAxis& time, Direction direction, BcMode mode,
                                const MeasurementTrace* drive = nullptr);

/// Per-step view handed to a solve observer at time level n, after u^{n+1} is known.
struct StepInfo {
  int n = 0;
  double t = 0.0;
  std::span<const double> u_prev;
  std::span<const double> u;
  std::span<const double> u_next;
  std::span<const double> v;  // physical velocity at level n
  /// Leapfrog energy at level n: average of the half-level energies around it.
  double energy = 0.0;
  /// sum_i (h chi0_i / c_i) v_i^2 at level n (zero in Neumann mode).
  double flux_rate = 0.0;
};

using StepObserver = std::function<void(const StepInfo&)>;

struct SolveResult {
  WaveState final;
  MeasurementTrace trace;
};

/// Integrates n_steps leapfrog steps from `start` (given at time start.t) in the configured
/// direction and records the physical velocity on the Measurement nodes at every level.
SolveResult solve(const WaveState& start, const SolverConfig& config, const Setup& setup,
                  const StepObserver& observer = {});

/// One time step of the same scheme.
WaveState step(const WaveState& state, const SolverConfig& config, const Setup& setup);

}  // namespace npat
