#pragma once

#include <vector>

#include "npat/geometry.hpp"
#include "npat/operators.hpp"

namespace npat {

enum class PhantomKind { Bump, MultiBump, Annulus };

struct PhantomCenter {
  double x = 0.0;
  double y = 0.0;
};

/// Sum of smooth compactly supported bumps. A Bump or MultiBump term is
/// a * b(|x - c| / r); an Annulus term is a * b((|x - c| - r) / width), with
/// b(s) = exp(1 - 1/(1 - s^2)) for |s| < 1 and 0 otherwise.
struct PhantomSpec {
  PhantomKind kind = PhantomKind::Bump;
  std::vector<PhantomCenter> centers;
  std::vector<double> radii;
  /// Defaults to 1 for every term when empty.
  std::vector<double> amplitudes;
  /// When true, u1 uses the same profiles scaled by velocity_amplitudes.
  bool velocity_part = false;
  std::vector<double> velocity_amplitudes;
  /// Annulus half-width.
  double width = 0.0;
};

/// Bump profile b(s).
double bump_profile(double s);

/// Samples the phantom on the grid. Every support disc must lie at least 4h inside the grid
/// edges, otherwise SupportViolation.
StatePair make_phantom(const PhantomSpec& spec, const Grid& grid);

/// PAT mode flag: true when u1 vanishes identically, in which case the I- data are the even
/// reflection of the I+ data. Throws VelocityNotZero otherwise.
bool pat_even_data(const StatePair& v0);

}  // namespace npat
