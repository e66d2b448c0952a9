#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "npat/geometry.hpp"

namespace npat {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Sound speed squared and its gradient at arbitrary points. Built from a grid speed
/// field (cubic convolution of c^2 and its exact derivative) or from closed-form
/// callbacks for oracle tests.
class SpeedModel {
 public:
  using Eval = std::function<void(double x, double y, double& c2, Vec2& grad_c2)>;

  static SpeedModel from_grid(const Grid& grid, const SpeedField& speed);
  static SpeedModel analytic(Eval eval, double cmax, double max_grad_c);

  void eval(double x, double y, double& c2, Vec2& grad_c2) const;
  double cmax() const { return cmax_; }
  double max_grad_c() const { return max_grad_c_; }

 private:
  Grid grid_;
  Field c2_;  // with one ghost layer
  Eval analytic_;
  double cmax_ = 0.0;
  double max_grad_c_ = 0.0;
};

/// Position, covector and elapsed travel time along a geodesic of c^-2 dx^2.
struct RayState {
  Vec2 x;
  Vec2 xi;
  double t = 0.0;
};

enum class RayOutcome { Visible, HitWall, Tangential, Trapped };
const char* to_string(RayOutcome o);

struct RayOptions {
  /// |cos(incidence)| below this counts as tangential.
  double tangency = 0.05;
  /// Integration step in time; 0 picks safety * min(h/cmax, 0.1/max|grad c|).
  double step = 0.0;
  double safety = 0.5;
};

struct RayHit {
  RayState state;
  RayOutcome outcome = RayOutcome::Trapped;
  double cos_incidence = 0.0;
  /// Boundary node nearest to the crossing (valid unless Trapped).
  std::size_t node = 0;
  /// Largest drift of |xi| c(x) - 1 seen along the trace.
  double slowness_drift = 0.0;
};

/// Traces the Hamiltonian flow x' = c^2 xi, xi' = -1/2 grad(c^2) |xi|^2 with RK4 from x0 in
/// direction `dir` (normalised so |xi| c = 1) until the first crossing of the grid boundary
/// or travel time T. Crossings are bisection-refined to 1e-6 h.
RayHit trace_ray(Vec2 x0, Vec2 dir, double T, const Grid& grid, const BoundaryMap& bmap,
                 const SpeedModel& speed, const RayOptions& opts = {});

struct VisibilityRecord {
  std::size_t node = 0;
  int dir_index = 0;
  RayOutcome outcome = RayOutcome::Trapped;
  double hit_time = 0.0;
  double cos_incidence = 0.0;
  /// Boundary crossing point (the final position for Trapped rays).
  Vec2 hit;
};

struct VisibilityReport {
  std::vector<VisibilityRecord> records;
  double tangency = 0.05;
  int n_dirs = 0;
  double fraction = 0.0;
  bool pass = false;
  /// Smallest |cos| over visible hits (sampling-adequacy margin).
  double min_visible_cos = 0.0;
  /// Longest travel time among visible hits.
  double max_visible_time = 0.0;
};

/// Visibility test for every node of K and n_dirs equally spaced directions; a direction is
/// visible if the +xi or the -xi ray reaches a chi0 > 0 Measurement node non-tangentially
/// within time T.
VisibilityReport check_visibility(const RegionMask& K, double T, int n_dirs, const Grid& grid,
                                  const BoundaryMap& bmap, const SpeedModel& speed,
                                  const RayOptions& opts = {});

/// Per-node visible fraction over interior nodes (edge nodes get 0).
Field visibility_heatmap(double T, int n_dirs, const Grid& grid, const BoundaryMap& bmap,
                         const SpeedModel& speed, const RayOptions& opts = {});

/// CSV with header `x,y,dir_index,outcome,hit_time,cos_incidence`.
void write_visibility_csv(std::ostream& os, const VisibilityReport& report, const Grid& grid);

}  // namespace npat
