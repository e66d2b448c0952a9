#include "npat/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>

#include "npat/error.hpp"

namespace npat {

Grid::Grid(int nx_, int ny_, double h_, double x0_, double y0_)
    : nx(nx_), ny(ny_), h(h_), x0(x0_), y0(y0_) {
  if (nx < 8 || ny < 8) {
    throw Error(ErrorKind::InvalidArgument, "grid needs at least 8x8 nodes");
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw Error(ErrorKind::InvalidArgument, "grid spacing must be positive");
  }
}

SpeedField::SpeedField(const Grid& grid, Field values) : c_(std::move(values)) {
  if (c_.size() != grid.size()) {
    throw Error(ErrorKind::InvalidArgument, "speed field size does not match grid");
  }
  cmin_ = std::numeric_limits<double>::infinity();
  cmax_ = 0.0;
  for (double c : c_) {
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw Error(ErrorKind::InvalidArgument, "sound speed must be positive and finite");
    }
    cmin_ = std::min(cmin_, c);
    cmax_ = std::max(cmax_, c);
  }
}

SpeedField SpeedField::constant(const Grid& grid, double c) {
  return SpeedField(grid, Field(grid.size(), c));
}

SpeedField SpeedField::gradient(const Grid& grid, double a, double b, int axis) {
  Field c(grid.size());
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      c[grid.index(i, j)] = a + b * (axis == 0 ? grid.x(i) : grid.y(j));
    }
  }
  return SpeedField(grid, std::move(c));
}

std::vector<std::size_t> BoundaryMap::measurement_nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < cls.size(); ++k) {
    if (cls[k] == NodeClass::Measurement) out.push_back(k);
  }
  return out;
}

std::size_t BoundaryMap::count(NodeClass c) const {
  return static_cast<std::size_t>(std::count(cls.begin(), cls.end(), c));
}

std::size_t RegionMask::count() const {
  return static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(), [](auto m) { return m != 0; }));
}

std::vector<std::size_t> RegionMask::nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (mask[k]) out.push_back(k);
  }
  return out;
}

RegionMask make_region(const Grid& grid, std::vector<std::uint8_t> mask) {
  if (mask.size() != grid.size()) {
    throw Error(ErrorKind::InvalidArgument, "mask size does not match grid");
  }
  RegionMask r;
  r.mask = std::move(mask);
  int margin = std::numeric_limits<int>::max();
  bool any = false;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      if (!r.mask[grid.index(i, j)]) continue;
      any = true;
      margin = std::min({margin, i, j, grid.nx - 1 - i, grid.ny - 1 - j});
    }
  }
  r.margin = any ? margin : -1;
  return r;
}

RegionMask mask_union(const Grid& grid, const RegionMask& a, const RegionMask& b) {
  std::vector<std::uint8_t> m(grid.size());
  for (std::size_t k = 0; k < m.size(); ++k) m[k] = (a.mask[k] || b.mask[k]) ? 1 : 0;
  return make_region(grid, std::move(m));
}

RegionMask mask_complement_interior(const Grid& grid, const RegionMask& m, int margin) {
  std::vector<std::uint8_t> out(grid.size(), 0);
  for (int j = margin; j < grid.ny - margin; ++j) {
    for (int i = margin; i < grid.nx - margin; ++i) {
      const auto k = grid.index(i, j);
      out[k] = m.mask[k] ? 0 : 1;
    }
  }
  return make_region(grid, std::move(out));
}

bool mask_subset(const RegionMask& inner, const RegionMask& outer) {
  for (std::size_t k = 0; k < inner.mask.size(); ++k) {
    if (inner.mask[k] && !outer.mask[k]) return false;
  }
  return true;
}

namespace {

double chi0_ramp(double dist_to_end, double ramp) {
  if (dist_to_end >= ramp) return 1.0;
  if (dist_to_end <= 0.0) return 0.0;
  return 0.5 * (1.0 - std::cos(std::numbers::pi * dist_to_end / ramp));
}

}  // namespace

std::pair<Grid, BoundaryMap> build_corner_geometry(double arm_length, double pad, double h) {
  if (!(arm_length > 0.0)) throw Error(ErrorKind::InvalidArgument, "arm_length must be positive");
  if (!(pad >= 0.0)) throw Error(ErrorKind::InvalidArgument, "pad must be non-negative");
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "h must be positive");

  const double ratio = arm_length / h;
  const double n_arm = std::round(ratio);
  if (n_arm < 1.0 || std::abs(ratio - n_arm) > 1e-9 * ratio) {
    std::ostringstream msg;
    msg << "h=" << h << " does not tile arm_length=" << arm_length;
    throw Error(ErrorKind::NonDivisibleSpacing, msg.str());
  }
  const int arm_nodes = static_cast<int>(n_arm);
  const int n_pad = static_cast<int>(std::ceil(pad / h - 1e-9));
  const int n = arm_nodes + n_pad + 1;
  Grid grid(n, n, h, 0.0, 0.0);

  BoundaryMap bmap;
  bmap.cls.assign(grid.size(), NodeClass::Interior);
  bmap.chi0.assign(grid.size(), 0.0);
  const double ramp = kChi0RampFraction * arm_length;

  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const auto k = grid.index(i, j);
      if (i == n - 1 || j == n - 1) {
        bmap.cls[k] = NodeClass::Truncation;
        continue;
      }
      if (i != 0 && j != 0) continue;
      // distance from the corner along the arm; the corner itself lies on both arms
      const int along = (i == 0) ? j : i;
      if (along <= arm_nodes) {
        bmap.cls[k] = NodeClass::Measurement;
        bmap.chi0[k] = chi0_ramp((arm_nodes - along) * h, ramp);
      } else {
        bmap.cls[k] = NodeClass::Wall;
      }
    }
  }
  return {grid, std::move(bmap)};
}

void validate_boundary_map(const Grid& grid, const BoundaryMap& bmap) {
  if (bmap.cls.size() != grid.size() || bmap.chi0.size() != grid.size()) {
    throw Error(ErrorKind::InvalidArgument, "boundary map size does not match grid");
  }
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const auto k = grid.index(i, j);
      const bool edge = grid.on_edge(i, j);
      if (edge == (bmap.cls[k] == NodeClass::Interior)) {
        throw Error(ErrorKind::InvalidArgument, "edge nodes must be classified and interior nodes must not");
      }
      const double c = bmap.chi0[k];
      if (!(c >= 0.0) || !std::isfinite(c)) {
        throw Error(ErrorKind::InvalidArgument, "chi0 must be finite and non-negative");
      }
      if (c > 0.0 && bmap.cls[k] != NodeClass::Measurement) {
        throw Error(ErrorKind::InvalidArgument, "chi0 must vanish off Measurement nodes");
      }
    }
  }
}

Field travel_times(const Grid& grid, const SpeedField& speed, const BoundaryMap& bmap) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  enum class State : std::uint8_t { Far, Trial, Known };

  const std::size_t n = grid.size();
  Field t(n, inf);
  std::vector<State> state(n, State::Far);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;

  for (std::size_t k : bmap.measurement_nodes()) {
    t[k] = 0.0;
    state[k] = State::Trial;
    heap.emplace(0.0, k);
  }

  auto solve_at = [&](int i, int j) {
    const auto k = grid.index(i, j);
    auto known = [&](int ii, int jj) {
      if (ii < 0 || jj < 0 || ii >= grid.nx || jj >= grid.ny) return inf;
      const auto kk = grid.index(ii, jj);
      return state[kk] == State::Known ? t[kk] : inf;
    };
    const double a = std::min(known(i - 1, j), known(i + 1, j));
    const double b = std::min(known(i, j - 1), known(i, j + 1));
    const double hf = grid.h / speed[k];
    double lo = std::min(a, b);
    double hi = std::max(a, b);
    if (!std::isfinite(lo)) return inf;
    if (std::isfinite(hi) && hi - lo < hf) {
      const double d = hi - lo;
      return 0.5 * (lo + hi + std::sqrt(2.0 * hf * hf - d * d));
    }
    return lo + hf;
  };

  while (!heap.empty()) {
    const auto [tk, k] = heap.top();
    heap.pop();
    if (state[k] == State::Known || tk > t[k]) continue;
    state[k] = State::Known;
    const int i = grid.col(k);
    const int j = grid.row(k);
    const int di[4] = {-1, 1, 0, 0};
    const int dj[4] = {0, 0, -1, 1};
    for (int q = 0; q < 4; ++q) {
      const int ii = i + di[q];
      const int jj = j + dj[q];
      if (ii < 0 || jj < 0 || ii >= grid.nx || jj >= grid.ny) continue;
      const auto kk = grid.index(ii, jj);
      if (state[kk] == State::Known) continue;
      const double cand = solve_at(ii, jj);
      if (cand < t[kk]) {
        t[kk] = cand;
        state[kk] = State::Trial;
        heap.emplace(cand, kk);
      }
    }
  }
  return t;
}

RegionMask domain_of_influence(const Grid& grid, const SpeedField& speed, const BoundaryMap& bmap,
                               double T) {
  if (!(T > 0.0)) throw Error(ErrorKind::InvalidArgument, "T must be positive");
  const Field t = travel_times(grid, speed, bmap);
  const double limit = T + grid.h / speed.cmin();
  std::vector<std::uint8_t> m(grid.size());
  for (std::size_t k = 0; k < m.size(); ++k) m[k] = t[k] <= limit ? 1 : 0;
  return make_region(grid, std::move(m));
}

RegionMask region_from_phantom(const Grid& grid, std::span<const double> field, double threshold) {
  if (field.size() != grid.size()) throw Error(ErrorKind::InvalidArgument, "field size does not match grid");
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "threshold must lie in (0, 1)");
  }
  double peak = 0.0;
  for (double v : field) {
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "field is not finite");
    peak = std::max(peak, std::abs(v));
  }
  std::vector<std::uint8_t> out(grid.size(), 0);
  if (peak == 0.0) return make_region(grid, std::move(out));

  constexpr int dilation = 2;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      if (!(std::abs(field[grid.index(i, j)]) > threshold * peak)) continue;
      for (int dj = -dilation; dj <= dilation; ++dj) {
        for (int di = -dilation; di <= dilation; ++di) {
          const int ii = i + di;
          const int jj = j + dj;
          if (ii < 0 || jj < 0 || ii >= grid.nx || jj >= grid.ny) {
            throw Error(ErrorKind::InteriorViolation, "dilated region leaves the grid");
          }
          out[grid.index(ii, jj)] = 1;
        }
      }
    }
  }
  RegionMask r = make_region(grid, std::move(out));
  if (r.margin < 2) {
    throw Error(ErrorKind::InteriorViolation, "region comes within two nodes of the boundary");
  }
  return r;
}

double mask_distance(const Grid& grid, const RegionMask& a, const RegionMask& b) {
  const auto na = a.nodes();
  const auto nb = b.nodes();
  if (na.empty() || nb.empty()) throw Error(ErrorKind::EmptyMask, "mask_distance needs nonempty masks");
  long best = std::numeric_limits<long>::max();
  for (std::size_t ka : na) {
    const long ia = grid.col(ka), ja = grid.row(ka);
    for (std::size_t kb : nb) {
      const long di = ia - grid.col(kb);
      const long dj = ja - grid.row(kb);
      best = std::min(best, di * di + dj * dj);
      if (best == 0) return 0.0;
    }
  }
  return grid.h * std::sqrt(static_cast<double>(best));
}

void check_causal_padding(const Grid& grid, const SpeedField& speed, const BoundaryMap& bmap,
                          const RegionMask* region, double T) {
  const double need = 2.0 * speed.cmax() * T + 4.0 * grid.h;
  std::vector<std::size_t> sources = bmap.measurement_nodes();
  if (region != nullptr) {
    for (std::size_t k : region->nodes()) sources.push_back(k);
  }
  for (std::size_t kt = 0; kt < grid.size(); ++kt) {
    if (bmap.cls[kt] != NodeClass::Truncation) continue;
    const double xt = grid.x(grid.col(kt)), yt = grid.y(grid.row(kt));
    for (std::size_t ks : sources) {
      const double dx = xt - grid.x(grid.col(ks));
      const double dy = yt - grid.y(grid.row(ks));
      if (std::hypot(dx, dy) <= need) {
        std::ostringstream msg;
        msg << "truncation node at (" << xt << ", " << yt << ") lies within " << need
            << " of a measurement or region node; increase pad";
        throw Error(ErrorKind::PadTooSmall, msg.str());
      }
    }
  }
}

}  // namespace npat
