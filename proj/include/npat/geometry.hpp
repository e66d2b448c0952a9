#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace npat {

using Field = std::vector<double>;

/// Uniform Cartesian node grid. Node (i, j) sits at (x0 + i*h, y0 + j*h);
/// fields are stored row-major with j the slow index.
struct Grid {
  int nx = 0;
  int ny = 0;
  double h = 0.0;
  double x0 = 0.0;
  double y0 = 0.0;

  Grid() = default;
  Grid(int nx, int ny, double h, double x0 = 0.0, double y0 = 0.0);

  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i);
  }
  int col(std::size_t k) const { return static_cast<int>(k % static_cast<std::size_t>(nx)); }
  int row(std::size_t k) const { return static_cast<int>(k / static_cast<std::size_t>(nx)); }
  double x(int i) const { return x0 + i * h; }
  double y(int j) const { return y0 + j * h; }
  double xmax() const { return x(nx - 1); }
  double ymax() const { return y(ny - 1); }
  bool on_edge(int i, int j) const { return i == 0 || j == 0 || i == nx - 1 || j == ny - 1; }

  Field zeros() const { return Field(size(), 0.0); }

  friend bool operator==(const Grid&, const Grid&) = default;
};

class SpeedField {
 public:
  SpeedField() = default;
  SpeedField(const Grid& grid, Field values);

  static SpeedField constant(const Grid& grid, double c);
  /// c = a + b * coordinate(axis), axis 0 = x, 1 = y.
  static SpeedField gradient(const Grid& grid, double a, double b, int axis = 0);

  double operator[](std::size_t k) const { return c_[k]; }
  const Field& values() const { return c_; }
  double cmax() const { return cmax_; }
  double cmin() const { return cmin_; }

 private:
  Field c_;
  double cmax_ = 0.0;
  double cmin_ = 0.0;
};

enum class NodeClass : std::uint8_t { Interior = 0, Wall = 1, Measurement = 2, Truncation = 3 };

/// Per-node boundary classification plus the measurement cutoff chi0.
/// Only edge nodes of the grid may be non-Interior; Truncation nodes are held at zero.
struct BoundaryMap {
  std::vector<NodeClass> cls;
  Field chi0;

  NodeClass operator[](std::size_t k) const { return cls[k]; }
  std::vector<std::size_t> measurement_nodes() const;
  std::size_t count(NodeClass c) const;
};

/// Boolean node mask for a compact set K in the interior.
struct RegionMask {
  std::vector<std::uint8_t> mask;
  /// Minimum index distance from any masked node to the grid edge (-1 when empty).
  int margin = -1;

  bool operator[](std::size_t k) const { return mask[k] != 0; }
  std::size_t count() const;
  bool empty() const { return count() == 0; }
  std::vector<std::size_t> nodes() const;
};

RegionMask make_region(const Grid& grid, std::vector<std::uint8_t> mask);
RegionMask mask_union(const Grid& grid, const RegionMask& a, const RegionMask& b);
RegionMask mask_complement_interior(const Grid& grid, const RegionMask& m, int margin);
/// True when every node of `inner` is also set in `outer`.
bool mask_subset(const RegionMask& inner, const RegionMask& outer);

/// Fraction of each Measurement arm over which chi0 ramps from 0 to 1.
inline constexpr double kChi0RampFraction = 0.2;

/// 2D corner array: quadrant {x, y > 0} with two measurement arms of length
/// `arm_length` along the axes meeting at the origin. Axis nodes beyond the arms
/// are reflecting walls; the far edges are artificial truncation.
std::pair<Grid, BoundaryMap> build_corner_geometry(double arm_length, double pad, double h);

/// Validates that only edge nodes are non-Interior and chi0 vanishes off Measurement nodes.
void validate_boundary_map(const Grid& grid, const BoundaryMap& bmap);

/// First-arrival travel times from the Measurement node set (first-order upwind fast marching).
Field travel_times(const Grid& grid, const SpeedField& speed, const BoundaryMap& bmap);

/// Nodes whose travel time from the measurement set is at most T + h/cmin.
RegionMask domain_of_influence(const Grid& grid, const SpeedField& speed, const BoundaryMap& bmap,
                               double T);

/// Nodes with |field| > threshold * max|field|, dilated by two nodes.
RegionMask region_from_phantom(const Grid& grid, std::span<const double> field, double threshold);

/// Minimum Euclidean distance between masked nodes of a and b.
double mask_distance(const Grid& grid, const RegionMask& a, const RegionMask& b);

/// Checks the causal padding budget: every Truncation node must be farther than
/// 2*cmax*T + 4h from all Measurement nodes and all nodes of `region`.
void check_causal_padding(const Grid& grid, const SpeedField& speed, const BoundaryMap& bmap,
                          const RegionMask* region, double T);

}  // namespace npat
