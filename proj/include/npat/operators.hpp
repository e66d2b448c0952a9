#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "npat/geometry.hpp"
#include "npat/wave.hpp"

namespace npat {

/// Initial data (u0, u1) of the wave equation: displacement and velocity.
struct StatePair {
  Field u0;
  Field u1;
};

StatePair zero_pair(const Grid& grid);
StatePair operator+(const StatePair& a, const StatePair& b);
StatePair operator-(const StatePair& a, const StatePair& b);
StatePair operator*(double s, const StatePair& a);
/// y += s * x
void axpy(double s, const StatePair& x, StatePair& y);

/// Energy inner product 1/2 [ sum_e w_e d(u0) d(w0) + sum_i M_i u1_i w1_i ]: forward
/// differences over grid edges for the gradient term, c^-2 h^2 weighted lumped mass
/// for the velocity term (the 2D reduction of the weighted metric energy).
double energy_inner(const StatePair& a, const StatePair& b, const Setup& setup);
double energy_norm(const StatePair& a, const Setup& setup);

/// Leapfrog energy at level n from three consecutive levels; this is the quantity the
/// undriven impedance solver never increases.
double leapfrog_energy(std::span<const double> u_prev, std::span<const double> u,
                       std::span<const double> u_next, double tau, const Discretization& disc);

/// Boundary measurements of the Neumann problem on (0,T) and (-T,0).
struct Traces {
  MeasurementTrace plus;
  MeasurementTrace minus;
};

/// Lambda: forward and backward Neumann solves from t = 0 recording boundary velocity.
Traces lambda_op(const StatePair& v0, const Setup& setup);

/// Averaged back-and-forth nudging cycle N(U0; data).
StatePair nudge_cycle(const StatePair& u0, const Traces& data, const Setup& setup);

/// Undriven stabilized cycle S = (S+ + S-)/2.
StatePair s_cycle(const StatePair& u0, const Setup& setup);

inline constexpr double kDefaultCgTolerance = 1e-10;

struct ProjectionStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Energy-orthogonal projection onto pairs supported in K: u1 is restricted to K and u0 is
/// replaced by the K-supported field with the same discrete Laplacian on K (Dirichlet CG).
StatePair project_K(const StatePair& u, const RegionMask& K, const Setup& setup,
                    double tol = kDefaultCgTolerance, ProjectionStats* stats = nullptr);

/// sqrt(chi0) * du/dt on the Measurement nodes over (-T, T), glued from the two undriven
/// stabilized solves started at t = 0; sample k belongs to time -T + k*dt.
struct FluxTrace {
  double dt = 0.0;
  double t_start = 0.0;
  std::vector<std::size_t> nodes;
  std::vector<double> values;

  std::size_t n_samples() const { return nodes.empty() ? 0 : values.size() / nodes.size(); }
};

FluxTrace boundary_flux_trace(const StatePair& u0, const Setup& setup);

/// int int |E U0|^2 c^-1 dy dt with trapezoidal weights in time and h per node.
double flux_norm_squared(const FluxTrace& trace, const Setup& setup);

struct AuditRow {
  int step = 0;
  double time = 0.0;
  /// Leapfrog energy (average of the two half-level energies).
  double energy = 0.0;
  /// ||(u^n, v^n)||_*^2 with v^n the centered velocity.
  double energy_star = 0.0;
  /// Dissipated boundary energy up to t_n (trapezoid in time).
  double flux = 0.0;
  /// |energy_star_n - energy_star_0 + flux_n|.
  double balance_residual = 0.0;
};

/// One undriven stabilized forward solve over (0, T) from v0, logging the energy balance.
std::vector<AuditRow> energy_audit(const StatePair& v0, const Setup& setup);

/// Throws SupportViolation when the pair is nonzero on any grid-edge node.
void require_interior_support(const StatePair& u, const Setup& setup);

}  // namespace npat
