#include "npat/phantoms.hpp"

#include <cmath>

#include "npat/error.hpp"

namespace npat {

double bump_profile(double s) {
  const double s2 = s * s;
  if (s2 >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s2));
}

StatePair make_phantom(const PhantomSpec& spec, const Grid& grid) {
  const std::size_t n = spec.centers.size();
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "phantom needs at least one center");
  if (spec.kind == PhantomKind::Bump && n != 1) {
    throw Error(ErrorKind::InvalidArgument, "Bump phantom takes exactly one center (use MultiBump)");
  }
  if (spec.radii.size() != n) throw Error(ErrorKind::InvalidArgument, "phantom needs one radius per center");
  if (!spec.amplitudes.empty() && spec.amplitudes.size() != n) {
    throw Error(ErrorKind::InvalidArgument, "phantom needs one amplitude per center");
  }
  if (spec.velocity_part && spec.velocity_amplitudes.size() != n) {
    throw Error(ErrorKind::InvalidArgument, "velocity part needs one velocity amplitude per center");
  }
  if (spec.kind == PhantomKind::Annulus && !(spec.width > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "annulus width must be positive");
  }

  StatePair out = zero_pair(grid);
  // small slack so that a disc exactly 4h from the edge is not rejected by rounding
  const double margin = 4.0 * grid.h * (1.0 - 1e-9);
  for (std::size_t q = 0; q < n; ++q) {
    const auto c = spec.centers[q];
    const double r = spec.radii[q];
    if (!(r > 0.0)) throw Error(ErrorKind::InvalidArgument, "phantom radius must be positive");
    const double reach = spec.kind == PhantomKind::Annulus ? r + spec.width : r;
    if (c.x - reach < grid.x0 + margin || c.x + reach > grid.xmax() - margin || c.y - reach < grid.y0 + margin ||
        c.y + reach > grid.ymax() - margin) {
      throw Error(ErrorKind::SupportViolation, "phantom support disc is closer than 4h to the grid edge");
    }
    const double a = spec.amplitudes.empty() ? 1.0 : spec.amplitudes[q];
    const double b = spec.velocity_part ? spec.velocity_amplitudes[q] : 0.0;
    for (int j = 0; j < grid.ny; ++j) {
      for (int i = 0; i < grid.nx; ++i) {
        const double d = std::hypot(grid.x(i) - c.x, grid.y(j) - c.y);
        const double s = spec.kind == PhantomKind::Annulus ? (d - r) / spec.width : d / r;
        const double p = bump_profile(s);
        if (p == 0.0) continue;
        const auto k = grid.index(i, j);
        out.u0[k] += a * p;
        out.u1[k] += b * p;
      }
    }
  }
  return out;
}

bool pat_even_data(const StatePair& v0) {
  for (double x : v0.u1) {
    if (x != 0.0) throw Error(ErrorKind::VelocityNotZero, "PAT mode requires a zero velocity part");
  }
  return true;
}

}  // namespace npat
