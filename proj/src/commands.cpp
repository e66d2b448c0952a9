#include "npat/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "npat/error.hpp"
#include "npat/io.hpp"
#include "npat/phantoms.hpp"
#include "npat/rays.hpp"
#include "npat/reconstruct.hpp"

namespace npat {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Entries = std::vector<std::pair<std::string, std::string>>;

std::string in_dir(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void prepare_out(const CommandOptions& opts) {
  std::error_code ec;
  fs::create_directories(opts.out_dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create output directory " + opts.out_dir + ": " + ec.message());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorKind::IoError, "cannot open " + path + " for writing");
  os << text;
  if (!os) throw Error(ErrorKind::IoError, "write failed: " + path);
}

Entries grid_entries(const Setup& s) {
  return {{"nx", std::to_string(s.grid.nx)},
          {"ny", std::to_string(s.grid.ny)},
          {"h", fmt(s.grid.h)},
          {"x0", fmt(s.grid.x0)},
          {"y0", fmt(s.grid.y0)},
          {"T", fmt(s.time.T)},
          {"dt", fmt(s.time.dt)},
          {"n_steps", std::to_string(s.time.n_steps)},
          {"cfl_effective", fmt(s.time.cfl)},
          {"cmax", fmt(s.speed.cmax())},
          {"cmin", fmt(s.speed.cmin())},
          {"n_measurement", std::to_string(s.measurement.size())}};
}

/// Config echo followed by a [run] section with solver constants and results.
void write_manifest(const CommandOptions& opts, const RunConfig& cfg, const std::string& command,
                    const Setup& setup, const Entries& extra) {
  std::ostringstream os;
  os << echo_config(cfg) << "\n[run]\n";
  os << "command = " << command << '\n';
  for (const auto& [k, v] : grid_entries(setup)) os << k << " = " << v << '\n';
  for (const auto& [k, v] : extra) os << k << " = " << v << '\n';
  write_text(in_dir(opts.out_dir, "manifest.ini"), os.str());
}

void log(const std::string& msg) { std::cerr << "npat: " << msg << '\n'; }

}  // namespace

Setup build_setup(const RunConfig& cfg, double h) {
  const auto& g = cfg.geometry;
  if (h <= 0.0) h = g.h;
  Grid grid;
  BoundaryMap bmap;
  if (g.preset == "corner") {
    std::tie(grid, bmap) = build_corner_geometry(g.arm_length, g.pad, h);
  } else {
    if (h != g.h) throw Error(ErrorKind::ConfigError, "explicit geometry cannot be re-sampled at another spacing");
    grid = Grid(g.nx, g.ny, g.h, g.x0, g.y0);
    const Field codes = read_field(g.boundary_file, grid);
    bmap.cls.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double c = codes[k];
      if (c != 0.0 && c != 1.0 && c != 2.0 && c != 3.0) {
        throw Error(ErrorKind::ConfigError, g.boundary_file + ": node class codes must be 0, 1, 2 or 3");
      }
      bmap.cls[k] = static_cast<NodeClass>(static_cast<int>(c));
    }
    bmap.chi0 = read_field(g.chi0_file, grid);
  }
  for (double& c : bmap.chi0) c *= g.chi0_scale;
  validate_boundary_map(grid, bmap);

  SpeedField speed;
  const auto& sp = cfg.speed;
  if (sp.kind == "constant") {
    speed = SpeedField::constant(grid, sp.value);
  } else if (sp.kind == "gradient") {
    speed = SpeedField::gradient(grid, sp.a, sp.b, sp.axis);
  } else {
    speed = SpeedField(grid, read_field(sp.file, grid));
  }
  return make_setup(grid, speed, bmap, cfg.time.T, cfg.time.cfl);
}

StatePair build_phantom(const RunConfig& cfg, const Setup& setup) {
  if (!cfg.has_phantom) throw Error(ErrorKind::ConfigError, "this command needs a [phantom] section");
  return make_phantom(cfg.phantom, setup.grid);
}

RegionMask build_region(const RunConfig& cfg, const Setup& setup, const StatePair* phantom) {
  const Grid& g = setup.grid;
  RegionMask K;
  if (cfg.region.source == "file") {
    K = read_mask(cfg.region.file, g);
  } else if (cfg.region.source == "doi") {
    RegionMask doi = domain_of_influence(g, setup.speed, setup.boundary, setup.time.T);
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        if (g.on_edge(i, j)) doi.mask[g.index(i, j)] = 0;
      }
    }
    K = make_region(g, std::move(doi.mask));
  } else {
    if (phantom == nullptr) throw Error(ErrorKind::ConfigError, "region source = phantom needs a phantom");
    Field mag(g.size());
    for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::hypot(phantom->u0[k], phantom->u1[k]);
    K = region_from_phantom(g, mag, cfg.region.threshold);
  }
  if (K.empty()) throw Error(ErrorKind::EmptyMask, "region K is empty");
  // the padding budget covers waves leaving K; a domain-of-influence K is bounded by the arms
  check_causal_padding(g, setup.speed, setup.boundary, cfg.region.source == "doi" ? nullptr : &K, setup.time.T);
  return K;
}

void cmd_forward(const RunConfig& cfg, const CommandOptions& opts) {
  const Setup setup = build_setup(cfg);
  const StatePair v0 = build_phantom(cfg, setup);
  const RegionMask K = build_region(cfg, setup, &v0);
  require_interior_support(v0, setup);
  prepare_out(opts);
  log("forward: " + std::to_string(setup.grid.nx) + "x" + std::to_string(setup.grid.ny) + " grid, " +
      std::to_string(setup.time.n_steps) + " steps per solve");

  const Traces data = lambda_op(v0, setup);
  write_field(in_dir(opts.out_dir, "phantom_u0.npat"), setup.grid, v0.u0);
  write_field(in_dir(opts.out_dir, "phantom_u1.npat"), setup.grid, v0.u1);
  write_mask(in_dir(opts.out_dir, "region.npat"), setup.grid, K);
  write_trace(in_dir(opts.out_dir, "trace_plus.npat"), data.plus);
  write_trace(in_dir(opts.out_dir, "trace_minus.npat"), data.minus);

  double trace_energy = 0.0;
  for (const auto* tr : {&data.plus, &data.minus}) {
    for (double v : tr->values) trace_energy += v * v;
  }
  write_manifest(opts, cfg, "forward", setup,
                 {{"region_nodes", std::to_string(K.count())},
                  {"phantom_energy_norm", fmt(energy_norm(v0, setup))},
                  {"trace_sum_squares", fmt(trace_energy)}});
}

void cmd_reconstruct(const RunConfig& cfg, const CommandOptions& opts) {
  if (opts.data_dir.empty()) throw Error(ErrorKind::ConfigError, "reconstruct needs --data DIR (a forward output)");
  const Setup setup = build_setup(cfg);

  const std::string manifest_path = in_dir(opts.data_dir, "manifest.ini");
  if (!fs::exists(manifest_path)) throw Error(ErrorKind::ConfigError, "data manifest not found: " + manifest_path);
  const Ini manifest = Ini::load(manifest_path);
  for (const auto& [key, value] : grid_entries(setup)) {
    if (key == "cfl_effective") continue;
    const std::string* got = manifest.find("run", key);
    if (got == nullptr || *got != value) {
      throw Error(ErrorKind::GeometryMismatch, "data was produced with " + key + " = " + (got ? *got : "<missing>") +
                                                   ", this run has " + key + " = " + value);
    }
  }

  Traces data;
  data.plus = read_trace(in_dir(opts.data_dir, "trace_plus.npat"));
  data.minus = read_trace(in_dir(opts.data_dir, "trace_minus.npat"));

  std::optional<StatePair> truth;
  if (fs::exists(in_dir(opts.data_dir, "phantom_u0.npat"))) {
    truth = StatePair{read_field(in_dir(opts.data_dir, "phantom_u0.npat"), setup.grid),
                      read_field(in_dir(opts.data_dir, "phantom_u1.npat"), setup.grid)};
  }
  std::optional<StatePair> phantom;
  if (cfg.region.source == "phantom") phantom = build_phantom(cfg, setup);
  const RegionMask K = build_region(cfg, setup, phantom ? &*phantom : nullptr);
  prepare_out(opts);

  const int stride = opts.stride >= 0 ? opts.stride : cfg.output.stride;
  ReconstructResult res;
  const StatePair* truth_ptr = truth ? &*truth : nullptr;
  if (cfg.solver.method == "nudging") {
    ReconstructOptions ro;
    ro.j_max = cfg.solver.j_max;
    ro.cg_tol = cfg.solver.cg_tol;
    ro.stop_ratio = cfg.solver.stop_ratio;
    if (stride > 0) {
      ro.on_iterate = [&](int j, const StatePair& u) {
        if (j % stride != 0) return;
        char name[64];
        std::snprintf(name, sizeof name, "iterate_%04d_u0.npat", j);
        write_field(in_dir(opts.out_dir, name), setup.grid, u.u0);
        std::snprintf(name, sizeof name, "iterate_%04d_u1.npat", j);
        write_field(in_dir(opts.out_dir, name), setup.grid, u.u1);
      };
    }
    res = reconstruct_nudging(data, K, setup, ro, truth_ptr);
  } else {
    res = reconstruct_neumann_series(data, K, setup, cfg.solver.j_max, cfg.solver.cg_tol, truth_ptr);
  }
  for (const auto& w : res.log.warnings) log("warning: " + w);

  write_field(in_dir(opts.out_dir, "estimate_u0.npat"), setup.grid, res.estimate.u0);
  write_field(in_dir(opts.out_dir, "estimate_u1.npat"), setup.grid, res.estimate.u1);
  {
    std::ofstream os(in_dir(opts.out_dir, "convergence.csv"), std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorKind::IoError, "cannot write convergence.csv");
    write_convergence_csv(os, res.log);
  }
  Entries extra = {{"method", cfg.solver.method},
                   {"iterations", std::to_string(res.log.records.back().iter)},
                   {"rate", fmt(res.log.rate)},
                   {"rate_r2", fmt(res.log.r2)},
                   {"final_error", fmt(res.log.records.back().error)},
                   {"final_update", fmt(res.log.records.back().update)},
                   {"stride", std::to_string(stride)},
                   {"warnings", std::to_string(res.log.warnings.size())}};
  if (cfg.output.pgm) {
    const PgmRange r = write_pgm(in_dir(opts.out_dir, "estimate_u0.pgm"), setup.grid, res.estimate.u0);
    extra.emplace_back("pgm_min", fmt(r.lo));
    extra.emplace_back("pgm_max", fmt(r.hi));
  }
  write_manifest(opts, cfg, "reconstruct", setup, extra);
  char line[160];
  std::snprintf(line, sizeof line, "reconstruct: %d iterations, rate %.6g (r2 %.6g), final error %.6g",
                res.log.records.back().iter, res.log.rate, res.log.r2, res.log.records.back().error);
  log(line);
}

void cmd_vc(const RunConfig& cfg, const CommandOptions& opts) {
  const Setup setup = build_setup(cfg);
  std::optional<StatePair> phantom;
  if (cfg.region.source == "phantom") phantom = build_phantom(cfg, setup);
  const RegionMask K = build_region(cfg, setup, phantom ? &*phantom : nullptr);
  prepare_out(opts);

  const SpeedModel speed = SpeedModel::from_grid(setup.grid, setup.speed);
  RayOptions ro;
  ro.tangency = cfg.vc.tangency;
  const VisibilityReport rep =
      check_visibility(K, setup.time.T, cfg.vc.n_dirs, setup.grid, setup.boundary, speed, ro);
  {
    std::ofstream os(in_dir(opts.out_dir, "visibility.csv"), std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorKind::IoError, "cannot write visibility.csv");
    write_visibility_csv(os, rep, setup.grid);
  }
  if (cfg.vc.heatmap) {
    const Field heat =
        visibility_heatmap(setup.time.T, cfg.vc.heatmap_dirs, setup.grid, setup.boundary, speed, ro);
    write_field(in_dir(opts.out_dir, "heatmap.npat"), setup.grid, heat);
  }
  write_manifest(opts, cfg, "vc", setup,
                 {{"pass", rep.pass ? "true" : "false"},
                  {"fraction", fmt(rep.fraction)},
                  {"min_visible_cos", fmt(rep.min_visible_cos)},
                  {"max_visible_time", fmt(rep.max_visible_time)}});
  std::printf("pass=%s fraction=%.6f\n", rep.pass ? "true" : "false", rep.fraction);
}

void cmd_doi(const RunConfig& cfg, const CommandOptions& opts) {
  const Setup setup = build_setup(cfg);
  prepare_out(opts);
  const Field tt = travel_times(setup.grid, setup.speed, setup.boundary);
  const RegionMask doi = domain_of_influence(setup.grid, setup.speed, setup.boundary, setup.time.T);
  write_field(in_dir(opts.out_dir, "travel_time.npat"), setup.grid, tt);
  write_mask(in_dir(opts.out_dir, "doi_mask.npat"), setup.grid, doi);
  write_manifest(opts, cfg, "doi", setup, {{"doi_nodes", std::to_string(doi.count())}});
}

void cmd_audit(const RunConfig& cfg, const CommandOptions& opts) {
  std::vector<double> hs = {cfg.geometry.h};
  for (double h : cfg.audit.resolutions) {
    if (h != cfg.geometry.h) hs.push_back(h);
  }
  prepare_out(opts);

  std::vector<double> worst;
  Setup base;
  for (std::size_t q = 0; q < hs.size(); ++q) {
    const Setup setup = build_setup(cfg, hs[q]);
    const StatePair v0 = build_phantom(cfg, setup);
    check_causal_padding(setup.grid, setup.speed, setup.boundary, nullptr, setup.time.T);
    const auto rows = energy_audit(v0, setup);
    double w = 0.0;
    for (const auto& r : rows) w = std::max(w, r.balance_residual);
    worst.push_back(w);
    if (q == 0) {
      std::ostringstream os;
      os << "step,time,energy,energy_star,flux,balance_residual\n";
      for (const auto& r : rows) {
        os << r.step << ',' << fmt(r.time) << ',' << fmt(r.energy) << ',' << fmt(r.energy_star) << ','
           << fmt(r.flux) << ',' << fmt(r.balance_residual) << '\n';
      }
      write_text(in_dir(opts.out_dir, "audit.csv"), os.str());
      base = setup;
    }
  }

  Entries extra = {{"max_balance_residual", fmt(worst[0])}};
  if (hs.size() > 1) {
    // sort by spacing, coarse first, and fit successive orders
    std::vector<std::size_t> idx(hs.size());
    for (std::size_t q = 0; q < idx.size(); ++q) idx[q] = q;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return hs[a] > hs[b]; });
    std::ostringstream os;
    os << "h,max_balance_residual,order\n";
    double min_order = INFINITY;
    for (std::size_t q = 0; q < idx.size(); ++q) {
      os << fmt(hs[idx[q]]) << ',' << fmt(worst[idx[q]]) << ',';
      if (q > 0) {
        const double order = std::log(worst[idx[q - 1]] / worst[idx[q]]) / std::log(hs[idx[q - 1]] / hs[idx[q]]);
        min_order = std::min(min_order, order);
        os << fmt(order);
      } else {
        os << "nan";
      }
      os << '\n';
    }
    write_text(in_dir(opts.out_dir, "audit_refinement.csv"), os.str());
    extra.emplace_back("order", fmt(min_order));
    std::printf("order=%.6f\n", min_order);
  }
  write_manifest(opts, cfg, "audit", base, extra);
}

}  // namespace npat
