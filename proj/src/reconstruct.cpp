#include "npat/reconstruct.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "npat/error.hpp"

namespace npat {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_region(const RegionMask& K, const Setup& setup, ConvergenceLog& log) {
  const RegionMask doi = domain_of_influence(setup.grid, setup.speed, setup.boundary, setup.time.T);
  if (!mask_subset(K, doi)) {
    log.warnings.emplace_back("W1: region K is not contained in the domain of influence M(Gamma, T)");
  }
}

double error_of(const StatePair& u, const StatePair* truth, const Setup& setup) {
  if (truth == nullptr) return std::numeric_limits<double>::quiet_NaN();
  return energy_norm(u - *truth, setup);
}

void finish_log(ConvergenceLog& log) {
  try {
    const RateEstimate est = estimate_rate(log);
    log.rate = est.rate;
    log.r2 = est.r2;
  } catch (const Error&) {
    log.rate = std::numeric_limits<double>::quiet_NaN();
    log.r2 = std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

StatePair apply_R(const StatePair& u, const RegionMask& K, const Setup& setup, double cg_tol) {
  return project_K(s_cycle(u, setup), K, setup, cg_tol);
}

ReconstructResult reconstruct_nudging(const Traces& data, const RegionMask& K, const Setup& setup,
                                      const ReconstructOptions& opts, const StatePair* truth) {
  if (opts.j_max < 1) throw Error(ErrorKind::InvalidArgument, "j_max must be at least 1");
  if (data.plus.nodes != setup.measurement || data.minus.nodes != setup.measurement) {
    throw Error(ErrorKind::GeometryMismatch, "data traces were recorded on a different boundary map");
  }
  ReconstructResult res;
  ConvergenceLog& log = res.log;
  log.has_truth = truth != nullptr;
  check_region(K, setup, log);

  StatePair u = zero_pair(setup.grid);
  log.records.push_back({0, error_of(u, truth, setup), 0.0, 0.0});
  const auto t0 = Clock::now();
  double first_update = 0.0;
  for (int j = 1; j <= opts.j_max; ++j) {
    StatePair next = project_K(nudge_cycle(u, data, setup), K, setup, opts.cg_tol);
    const double update = energy_norm(next - u, setup);
    u = std::move(next);
    log.records.push_back({j, error_of(u, truth, setup), update, seconds_since(t0)});
    if (opts.on_iterate) opts.on_iterate(j, u);
    if (j == 1) first_update = update;
    if (j > 1 && update <= opts.stop_ratio * first_update) break;
  }
  finish_log(log);
  res.estimate = std::move(u);
  return res;
}

ReconstructResult reconstruct_neumann_series(const Traces& data, const RegionMask& K, const Setup& setup,
                                             int n_terms, double cg_tol, const StatePair* truth) {
  if (n_terms < 1) throw Error(ErrorKind::InvalidArgument, "n_terms must be at least 1");
  if (data.plus.nodes != setup.measurement || data.minus.nodes != setup.measurement) {
    throw Error(ErrorKind::GeometryMismatch, "data traces were recorded on a different boundary map");
  }
  ReconstructResult res;
  ConvergenceLog& log = res.log;
  log.has_truth = truth != nullptr;
  check_region(K, setup, log);

  StatePair sum = zero_pair(setup.grid);
  log.records.push_back({0, error_of(sum, truth, setup), 0.0, 0.0});
  const auto t0 = Clock::now();
  StatePair term = project_K(nudge_cycle(zero_pair(setup.grid), data, setup), K, setup, cg_tol);
  for (int j = 1; j <= n_terms; ++j) {
    if (j > 1) term = apply_R(term, K, setup, cg_tol);
    axpy(1.0, term, sum);
    log.records.push_back({j, error_of(sum, truth, setup), energy_norm(term, setup), seconds_since(t0)});
  }
  finish_log(log);
  res.estimate = std::move(sum);
  return res;
}

RateEstimate estimate_rate(const std::vector<double>& values) {
  double peak = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) peak = std::max(peak, std::abs(v));
  }
  const double floor = 100.0 * std::numeric_limits<double>::epsilon() * peak;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double v = values[j];
    if (std::isfinite(v) && v > 10.0 * floor && v > 0.0) pts.emplace_back(static_cast<double>(j), std::log(v));
  }
  if (pts.size() < 4) {
    throw Error(ErrorKind::InsufficientData, "rate estimate needs at least 4 entries above the noise floor");
  }
  const std::size_t tail = std::min(pts.size(), std::max<std::size_t>((pts.size() + 1) / 2, 3));
  const std::size_t first = pts.size() - tail;
  double sx = 0.0, sy = 0.0;
  for (std::size_t q = first; q < pts.size(); ++q) {
    sx += pts[q].first;
    sy += pts[q].second;
  }
  const double n = static_cast<double>(tail);
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t q = first; q < pts.size(); ++q) {
    const double dx = pts[q].first - mx;
    const double dy = pts[q].second - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double slope = sxy / sxx;
  RateEstimate est;
  est.rate = std::exp(slope);
  // a perfectly flat tail is an exact fit
  est.r2 = syy <= 1e-30 * std::max(1.0, my * my) ? 1.0 : (sxy * sxy) / (sxx * syy);
  return est;
}

RateEstimate estimate_rate(const ConvergenceLog& log) {
  std::vector<double> v;
  for (const auto& r : log.records) {
    if (log.has_truth) {
      v.push_back(r.error);
    } else if (r.iter > 0) {
      v.push_back(r.update);
    }
  }
  return estimate_rate(v);
}

void write_convergence_csv(std::ostream& os, const ConvergenceLog& log) {
  os << "iter,error,update,rate,seconds\n";
  char buf[64];
  auto num = [&](double x) -> const char* {
    if (!std::isfinite(x)) return "nan";
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
  };
  for (std::size_t q = 0; q < log.records.size(); ++q) {
    const auto& r = log.records[q];
    os << r.iter << ',' << num(r.error) << ',';
    os << num(r.update) << ',';
    if (q > 0) {
      const auto& p = log.records[q - 1];
      const double ratio = log.has_truth ? r.error / p.error : (q > 1 ? r.update / p.update : NAN);
      os << num(ratio);
    }
    os << ',' << num(r.seconds) << '\n';
  }
}

}  // namespace npat
