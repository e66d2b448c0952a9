#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "npat/phantoms.hpp"

namespace npat {

/// Sectioned key = value text. Lines starting with '#' are comments; keys are unique
/// within a section; whitespace around keys and values is trimmed.
class Ini {
 public:
  static Ini parse(const std::string& text, const std::string& origin = "<config>");
  static Ini load(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  const std::string* find(const std::string& section, const std::string& key) const;
  bool has_section(const std::string& section) const { return sections_.count(section) != 0; }
  /// Keys of a section in file order.
  std::vector<std::string> keys(const std::string& section) const;
  std::vector<std::string> section_names() const { return order_; }
  const std::string& origin() const { return origin_; }

 private:
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections_;
  std::vector<std::string> order_;
  std::string origin_;
};

struct GeometryConfig {
  std::string preset = "corner";  // corner | explicit
  double arm_length = 1.0;
  double pad = 2.2;
  double h = 0.025;
  /// Multiplies chi0 on every Measurement node (0 switches damping off).
  double chi0_scale = 1.0;
  // explicit preset
  int nx = 0;
  int ny = 0;
  double x0 = 0.0;
  double y0 = 0.0;
  std::string boundary_file;  // field of node class codes 0..3
  std::string chi0_file;      // field of chi0 values
};

struct SpeedConfig {
  std::string kind = "constant";  // constant | gradient | file
  double value = 1.0;
  double a = 1.0;
  double b = 0.0;
  int axis = 0;
  std::string file;
};

struct TimeConfig {
  double T = 1.0;
  double cfl = 0.45;
};

struct RegionConfig {
  std::string source = "phantom";  // phantom | file | doi
  double threshold = 1e-9;
  std::string file;
};

struct SolverSection {
  std::string method = "nudging";  // nudging | neumann
  int j_max = 30;
  double cg_tol = 1e-10;
  double stop_ratio = 1e-12;
};

struct VcConfig {
  int n_dirs = 64;
  double tangency = 0.05;
  bool heatmap = false;
  int heatmap_dirs = 32;
};

struct AuditConfig {
  /// Extra grid spacings for the refinement-order estimate (the geometry h is always run).
  std::vector<double> resolutions;
};

struct OutputConfig {
  bool pgm = true;
  int stride = 0;
};

struct RunConfig {
  GeometryConfig geometry;
  SpeedConfig speed;
  TimeConfig time;
  bool has_phantom = false;
  PhantomSpec phantom;
  RegionConfig region;
  SolverSection solver;
  VcConfig vc;
  AuditConfig audit;
  OutputConfig output;
};

/// Resolves an Ini into a RunConfig; relative file paths are taken relative to `base_dir`.
/// Unknown sections or keys, malformed numbers and missing referenced files raise ConfigError.
/// A [run] section (written into manifests) is ignored so manifests can be fed back in.
RunConfig parse_config(const Ini& ini, const std::string& base_dir);
RunConfig load_config(const std::string& path);

/// Canonical INI text of a resolved config (every value, %.17g for reals).
std::string echo_config(const RunConfig& cfg);

}  // namespace npat
