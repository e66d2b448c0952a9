#include "npat/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "npat/error.hpp"

namespace npat {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Section {
 public:
  Section(const Ini& ini, std::string name) : ini_(ini), name_(std::move(name)) {
    for (const auto& k : ini_.keys(name_)) unused_.insert(k);
  }
  /// Rejects keys that were never read.
  void finish() const {
    if (!unused_.empty()) throw Error(ErrorKind::ConfigError, where(*unused_.begin()) + ": unknown key");
  }

  const std::string* raw(const std::string& key) {
    unused_.erase(key);
    return ini_.find(name_, key);
  }
  std::string str(const std::string& key, const std::string& def) {
    const auto* v = raw(key);
    return v ? *v : def;
  }
  double real(const std::string& key, double def) {
    const auto* v = raw(key);
    return v ? to_real(key, *v) : def;
  }
  int integer(const std::string& key, int def) {
    const auto* v = raw(key);
    if (!v) return def;
    const double d = to_real(key, *v);
    if (d != static_cast<int>(d)) throw Error(ErrorKind::ConfigError, where(key) + ": expected an integer");
    return static_cast<int>(d);
  }
  bool flag(const std::string& key, bool def) {
    const auto* v = raw(key);
    if (!v) return def;
    if (*v == "true" || *v == "on" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "off" || *v == "0" || *v == "no") return false;
    throw Error(ErrorKind::ConfigError, where(key) + ": expected true or false");
  }
  /// Whitespace- or comma-separated reals.
  std::vector<double> list(const std::string& key) {
    const auto* v = raw(key);
    std::vector<double> out;
    if (!v) return out;
    std::string s = *v;
    for (char& c : s) {
      if (c == ',') c = ' ';
    }
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(to_real(key, tok));
    return out;
  }
  std::string where(const std::string& key) const { return ini_.origin() + ": [" + name_ + "] " + key; }

 private:
  double to_real(const std::string& key, const std::string& s) const {
    errno = 0;
    char* end = nullptr;
    const double d = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(d)) {
      throw Error(ErrorKind::ConfigError, where(key) + ": '" + s + "' is not a finite number");
    }
    return d;
  }

  const Ini& ini_;
  std::string name_;
  std::set<std::string> unused_;
};

std::string resolve_path(const std::string& p, const std::string& base_dir, const std::string& what) {
  if (p.empty()) throw Error(ErrorKind::ConfigError, what + ": path is empty");
  std::filesystem::path path(p);
  if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
  path = path.lexically_normal();
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::ConfigError, what + ": file not found: " + path.string());
  return std::filesystem::absolute(path).string();
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw Error(ErrorKind::ConfigError, msg);
}

}  // namespace

Ini Ini::parse(const std::string& text, const std::string& origin) {
  Ini ini;
  ini.origin_ = origin;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorKind::ConfigError, origin + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') fail("unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty()) fail("empty section name");
      if (ini.sections_.count(section)) fail("duplicate section [" + section + "]");
      ini.sections_[section];
      ini.order_.push_back(section);
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    if (section.empty()) fail("key outside of any section");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) fail("empty key");
    auto& entries = ini.sections_[section];
    for (const auto& kv : entries) {
      if (kv.first == key) fail("duplicate key '" + key + "'");
    }
    entries.emplace_back(key, trim(t.substr(eq + 1)));
  }
  return ini;
}

Ini Ini::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::ConfigError, "cannot open config file: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse(ss.str(), path);
}

bool Ini::has(const std::string& section, const std::string& key) const { return find(section, key) != nullptr; }

const std::string* Ini::find(const std::string& section, const std::string& key) const {
  const auto it = sections_.find(section);
  if (it == sections_.end()) return nullptr;
  for (const auto& kv : it->second) {
    if (kv.first == key) return &kv.second;
  }
  return nullptr;
}

std::vector<std::string> Ini::keys(const std::string& section) const {
  std::vector<std::string> out;
  const auto it = sections_.find(section);
  if (it == sections_.end()) return out;
  for (const auto& kv : it->second) out.push_back(kv.first);
  return out;
}

RunConfig parse_config(const Ini& ini, const std::string& base_dir) {
  static const std::set<std::string> known = {"geometry", "speed", "time",  "phantom", "region",
                                              "solver",   "vc",    "audit", "output",  "run"};
  for (const auto& s : ini.section_names()) {
    require(known.count(s) != 0, ini.origin() + ": unknown section [" + s + "]");
  }
  RunConfig cfg;
  {
    Section s(ini, "geometry");
    auto& g = cfg.geometry;
    g.preset = s.str("preset", g.preset);
    g.h = s.real("h", g.h);
    g.chi0_scale = s.real("chi0_scale", g.chi0_scale);
    require(g.h > 0.0, s.where("h") + ": must be positive");
    require(g.chi0_scale >= 0.0, s.where("chi0_scale") + ": must be non-negative");
    if (g.preset == "corner") {
      g.arm_length = s.real("arm_length", g.arm_length);
      g.pad = s.real("pad", g.pad);
      require(g.arm_length > 0.0, s.where("arm_length") + ": must be positive");
      require(g.pad >= 0.0, s.where("pad") + ": must be non-negative");
    } else if (g.preset == "explicit") {
      g.nx = s.integer("nx", 0);
      g.ny = s.integer("ny", 0);
      g.x0 = s.real("x0", 0.0);
      g.y0 = s.real("y0", 0.0);
      g.boundary_file = resolve_path(s.str("boundary_file", ""), base_dir, s.where("boundary_file"));
      g.chi0_file = resolve_path(s.str("chi0_file", ""), base_dir, s.where("chi0_file"));
      require(g.nx >= 8 && g.ny >= 8, s.where("nx") + ": explicit grids need nx, ny >= 8");
    } else {
      throw Error(ErrorKind::ConfigError, s.where("preset") + ": expected corner or explicit");
    }
    s.finish();
  }
  {
    Section s(ini, "speed");
    auto& c = cfg.speed;
    c.kind = s.str("kind", c.kind);
    if (c.kind == "constant") {
      c.value = s.real("value", c.value);
      require(c.value > 0.0, s.where("value") + ": must be positive");
    } else if (c.kind == "gradient") {
      c.a = s.real("a", c.a);
      c.b = s.real("b", c.b);
      c.axis = s.integer("axis", c.axis);
      require(c.axis == 0 || c.axis == 1, s.where("axis") + ": must be 0 or 1");
    } else if (c.kind == "file") {
      c.file = resolve_path(s.str("file", ""), base_dir, s.where("file"));
    } else {
      throw Error(ErrorKind::ConfigError, s.where("kind") + ": expected constant, gradient or file");
    }
    s.finish();
  }
  {
    Section s(ini, "time");
    cfg.time.T = s.real("T", cfg.time.T);
    cfg.time.cfl = s.real("cfl", cfg.time.cfl);
    require(cfg.time.T > 0.0, s.where("T") + ": must be positive");
    s.finish();
  }
  if (ini.has_section("phantom")) {
    Section s(ini, "phantom");
    cfg.has_phantom = true;
    auto& p = cfg.phantom;
    const std::string kind = s.str("kind", "multibump");
    if (kind == "bump") {
      p.kind = PhantomKind::Bump;
    } else if (kind == "multibump") {
      p.kind = PhantomKind::MultiBump;
    } else if (kind == "annulus") {
      p.kind = PhantomKind::Annulus;
    } else {
      throw Error(ErrorKind::ConfigError, s.where("kind") + ": expected bump, multibump or annulus");
    }
    const auto* centers = s.raw("centers");
    require(centers != nullptr, s.where("centers") + ": required");
    std::istringstream cs(*centers);
    std::string item;
    while (std::getline(cs, item, ';')) {
      if (trim(item).empty()) continue;
      std::istringstream xy(item);
      PhantomCenter c;
      std::string extra;
      require(static_cast<bool>(xy >> c.x >> c.y) && !(xy >> extra),
              s.where("centers") + ": expected 'x y; x y; ...'");
      p.centers.push_back(c);
    }
    p.radii = s.list("radii");
    p.amplitudes = s.list("amplitudes");
    p.velocity_part = s.flag("velocity_part", false);
    p.velocity_amplitudes = s.list("velocity_amplitudes");
    p.width = s.real("width", 0.0);
    const std::size_t n = p.centers.size();
    require(n > 0, s.where("centers") + ": at least one center");
    require(p.radii.size() == n, s.where("radii") + ": need one radius per center");
    require(p.amplitudes.empty() || p.amplitudes.size() == n, s.where("amplitudes") + ": need one per center");
    require(!p.velocity_part || p.velocity_amplitudes.size() == n,
            s.where("velocity_amplitudes") + ": need one per center when velocity_part is on");
    s.finish();
  }
  {
    Section s(ini, "region");
    auto& r = cfg.region;
    r.source = s.str("source", r.source);
    r.threshold = s.real("threshold", r.threshold);
    if (r.source == "file") {
      r.file = resolve_path(s.str("file", ""), base_dir, s.where("file"));
    } else if (r.source == "phantom") {
      require(cfg.has_phantom, s.where("source") + ": source = phantom needs a [phantom] section");
    } else {
      require(r.source == "doi", s.where("source") + ": expected phantom, file or doi");
    }
    s.finish();
  }
  {
    Section s(ini, "solver");
    auto& v = cfg.solver;
    v.method = s.str("method", v.method);
    v.j_max = s.integer("j_max", v.j_max);
    v.cg_tol = s.real("cg_tol", v.cg_tol);
    v.stop_ratio = s.real("stop_ratio", v.stop_ratio);
    require(v.method == "nudging" || v.method == "neumann", s.where("method") + ": expected nudging or neumann");
    require(v.j_max >= 1, s.where("j_max") + ": must be at least 1");
    require(v.cg_tol > 0.0, s.where("cg_tol") + ": must be positive");
    require(v.stop_ratio >= 0.0, s.where("stop_ratio") + ": must be non-negative");
    s.finish();
  }
  {
    Section s(ini, "vc");
    auto& v = cfg.vc;
    v.n_dirs = s.integer("n_dirs", v.n_dirs);
    v.tangency = s.real("tangency", v.tangency);
    v.heatmap = s.flag("heatmap", v.heatmap);
    v.heatmap_dirs = s.integer("heatmap_dirs", v.heatmap_dirs);
    require(v.n_dirs >= 8 && v.heatmap_dirs >= 8, s.where("n_dirs") + ": at least 8 directions");
    require(v.tangency >= 0.0 && v.tangency < 1.0, s.where("tangency") + ": must lie in [0, 1)");
    s.finish();
  }
  {
    Section s(ini, "audit");
    cfg.audit.resolutions = s.list("resolutions");
    for (double h : cfg.audit.resolutions) require(h > 0.0, s.where("resolutions") + ": spacings must be positive");
    s.finish();
  }
  {
    Section s(ini, "output");
    cfg.output.pgm = s.flag("pgm", cfg.output.pgm);
    cfg.output.stride = s.integer("stride", cfg.output.stride);
    require(cfg.output.stride >= 0, s.where("stride") + ": must be non-negative");
    s.finish();
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  const Ini ini = Ini::load(path);
  const auto dir = std::filesystem::absolute(std::filesystem::path(path)).parent_path();
  return parse_config(ini, dir.string());
}

std::string echo_config(const RunConfig& cfg) {
  std::ostringstream os;
  auto kv = [&](const char* k, const std::string& v) { os << k << " = " << v << '\n'; };
  auto list = [&](const char* k, const std::vector<double>& v) {
    std::string s;
    for (std::size_t q = 0; q < v.size(); ++q) s += (q ? " " : "") + fmt(v[q]);
    kv(k, s);
  };
  const auto& g = cfg.geometry;
  os << "[geometry]\n";
  kv("preset", g.preset);
  kv("h", fmt(g.h));
  kv("chi0_scale", fmt(g.chi0_scale));
  if (g.preset == "corner") {
    kv("arm_length", fmt(g.arm_length));
    kv("pad", fmt(g.pad));
  } else {
    kv("nx", std::to_string(g.nx));
    kv("ny", std::to_string(g.ny));
    kv("x0", fmt(g.x0));
    kv("y0", fmt(g.y0));
    kv("boundary_file", g.boundary_file);
    kv("chi0_file", g.chi0_file);
  }
  os << "\n[speed]\n";
  kv("kind", cfg.speed.kind);
  if (cfg.speed.kind == "constant") kv("value", fmt(cfg.speed.value));
  if (cfg.speed.kind == "gradient") {
    kv("a", fmt(cfg.speed.a));
    kv("b", fmt(cfg.speed.b));
    kv("axis", std::to_string(cfg.speed.axis));
  }
  if (cfg.speed.kind == "file") kv("file", cfg.speed.file);
  os << "\n[time]\n";
  kv("T", fmt(cfg.time.T));
  kv("cfl", fmt(cfg.time.cfl));
  if (cfg.has_phantom) {
    const auto& p = cfg.phantom;
    os << "\n[phantom]\n";
    kv("kind", p.kind == PhantomKind::Bump ? "bump" : p.kind == PhantomKind::MultiBump ? "multibump" : "annulus");
    std::string c;
    for (std::size_t q = 0; q < p.centers.size(); ++q) {
      c += (q ? "; " : "") + fmt(p.centers[q].x) + " " + fmt(p.centers[q].y);
    }
    kv("centers", c);
    list("radii", p.radii);
    if (!p.amplitudes.empty()) list("amplitudes", p.amplitudes);
    kv("velocity_part", p.velocity_part ? "true" : "false");
    if (!p.velocity_amplitudes.empty()) list("velocity_amplitudes", p.velocity_amplitudes);
    if (p.kind == PhantomKind::Annulus) kv("width", fmt(p.width));
  }
  os << "\n[region]\n";
  kv("source", cfg.region.source);
  kv("threshold", fmt(cfg.region.threshold));
  if (cfg.region.source == "file") kv("file", cfg.region.file);
  os << "\n[solver]\n";
  kv("method", cfg.solver.method);
  kv("j_max", std::to_string(cfg.solver.j_max));
  kv("cg_tol", fmt(cfg.solver.cg_tol));
  kv("stop_ratio", fmt(cfg.solver.stop_ratio));
  os << "\n[vc]\n";
  kv("n_dirs", std::to_string(cfg.vc.n_dirs));
  kv("tangency", fmt(cfg.vc.tangency));
  kv("heatmap", cfg.vc.heatmap ? "true" : "false");
  kv("heatmap_dirs", std::to_string(cfg.vc.heatmap_dirs));
  os << "\n[audit]\n";
  list("resolutions", cfg.audit.resolutions);
  os << "\n[output]\n";
  kv("pgm", cfg.output.pgm ? "true" : "false");
  kv("stride", std::to_string(cfg.output.stride));
  return os.str();
}

}  // namespace npat
