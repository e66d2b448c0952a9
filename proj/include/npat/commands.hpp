#pragma once

#include <optional>
#include <string>

#include "npat/config.hpp"
#include "npat/geometry.hpp"
#include "npat/operators.hpp"
#include "npat/wave.hpp"

namespace npat {

struct CommandOptions {
  std::string out_dir = "out";
  /// Directory written by `forward` (reconstruct only).
  std::string data_dir;
  /// Write iterates every `stride` iterations; -1 defers to the config.
  int stride = -1;
};

/// Geometry, speed and time axis described by a config; `h` overrides the grid spacing.
Setup build_setup(const RunConfig& cfg, double h = 0.0);

/// The region K selected by [region]; `phantom` is required for source = phantom.
RegionMask build_region(const RunConfig& cfg, const Setup& setup, const StatePair* phantom);

/// Phantom V0 from [phantom] (ConfigError when the section is missing).
StatePair build_phantom(const RunConfig& cfg, const Setup& setup);

/// Writes phantom, region, Lambda traces and manifest.
void cmd_forward(const RunConfig& cfg, const CommandOptions& opts);
/// Nudging or Neumann-series reconstruction from the data directory of a forward run.
void cmd_reconstruct(const RunConfig& cfg, const CommandOptions& opts);
/// Visibility report for K; prints `pass=<bool> fraction=<f>` on stdout.
void cmd_vc(const RunConfig& cfg, const CommandOptions& opts);
/// Travel-time field and domain-of-influence mask.
void cmd_doi(const RunConfig& cfg, const CommandOptions& opts);
/// Energy balance audit, plus refinement order over [audit] resolutions.
void cmd_audit(const RunConfig& cfg, const CommandOptions& opts);

}  // namespace npat
