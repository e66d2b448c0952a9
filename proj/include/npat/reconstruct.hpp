#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "npat/operators.hpp"

namespace npat {

struct IterationRecord {
  int iter = 0;
  /// ||U_j - V0|| when the truth is known, NaN otherwise.
  double error = 0.0;
  /// ||U_j - U_{j-1}|| (0 for j = 0).
  double update = 0.0;
  double seconds = 0.0;
};

struct ConvergenceLog {
  std::vector<IterationRecord> records;
  double rate = 0.0;
  double r2 = 0.0;
  bool has_truth = false;
  std::vector<std::string> warnings;
};

struct ReconstructOptions {
  int j_max = 30;
  double cg_tol = kDefaultCgTolerance;
  /// Stop once update_j <= stop_ratio * update_1.
  double stop_ratio = 1e-12;
  /// Called with (j, U_j) after every iteration, e.g. to write iterates.
  std::function<void(int, const StatePair&)> on_iterate;
};

struct ReconstructResult {
  StatePair estimate;
  ConvergenceLog log;
};

/// U_{j+1} = P_K N(U_j; data) from U_0 = 0. Emits warning W1 into the log when K is not
/// contained in the domain of influence; the run still proceeds.
ReconstructResult reconstruct_nudging(const Traces& data, const RegionMask& K, const Setup& setup,
                                      const ReconstructOptions& opts,
                                      const StatePair* truth = nullptr);

/// Sum_{j < n_terms} R^j b with b = P_K N(0; data) and R = P_K S.
ReconstructResult reconstruct_neumann_series(const Traces& data, const RegionMask& K, const Setup& setup,
                                             int n_terms, double cg_tol = kDefaultCgTolerance,
                                             const StatePair* truth = nullptr);

/// R U = P_K S U.
StatePair apply_R(const StatePair& u, const RegionMask& K, const Setup& setup,
                  double cg_tol = kDefaultCgTolerance);

struct RateEstimate {
  double rate = 0.0;
  double r2 = 0.0;
};

/// Least-squares fit of log(values_j) against j over the tail half of the entries that sit
/// above 10x the noise floor; rate = exp(slope).
RateEstimate estimate_rate(const std::vector<double>& values);
/// Uses errors when the log has truth, update norms otherwise.
RateEstimate estimate_rate(const ConvergenceLog& log);

/// CSV with header `iter,error,update,rate,seconds`; seconds is wall time and not canonical.
void write_convergence_csv(std::ostream& os, const ConvergenceLog& log);

}  // namespace npat
