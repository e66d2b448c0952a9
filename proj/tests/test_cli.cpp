#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "npat/config.hpp"
#include "npat/io.hpp"

namespace fs = std::filesystem;

namespace {

const char* kSmall = R"([geometry]
preset = corner
arm_length = 1
pad = 2.2
h = 0.05

[speed]
kind = constant
value = 1

[time]
T = 0.9
cfl = 0.5

[phantom]
kind = bump
centers = 0.3 0.3
radii = 0.1
amplitudes = 1

[region]
source = phantom

[solver]
method = nudging
j_max = 5

[vc]
n_dirs = 16
heatmap = true
heatmap_dirs = 8

[output]
pgm = true
stride = 2
)";

struct Sandbox {
  fs::path dir;
  Sandbox() {
    dir = fs::temp_directory_path() / ("npat_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }

  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return dir / name;
  }

  /// Runs npat with the given arguments; returns the exit status and captures stdout+stderr.
  int run(const std::string& args, std::string* output = nullptr) const {
    const fs::path log = dir / "last.log";
    const std::string cmd = std::string(NPAT_EXE) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    if (output) {
      std::ifstream is(log);
      std::stringstream ss;
      ss << is.rdbuf();
      *output = ss.str();
    }
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string with(std::string text, const std::string& from, const std::string& to) {
  const auto at = text.find(from);
  REQUIRE(at != std::string::npos);
  return text.replace(at, from.size(), to);
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("configuration errors exit with 1") {
    Sandbox box;
    std::string out;
    CHECK(box.run("forward --config " + (box.dir / "missing.ini").string(), &out) == 1);
    CHECK(out.find("missing.ini") != std::string::npos);
    const auto bad = box.write("bad.ini", std::string(kSmall) + "\n[bogus]\nx = 1\n");
    CHECK(box.run("forward --config " + bad.string(), &out) == 1);
    CHECK(out.find("ConfigError") != std::string::npos);
    CHECK(box.run("forward", &out) == 1);
    CHECK(box.run("forward --config " + bad.string() + " --threads 0", &out) == 1);
  }

  TEST_CASE("forward, reconstruct and reruns") {
    Sandbox box;
    const auto cfg = box.write("small.ini", kSmall);
    const std::string data = (box.dir / "data").string();
    REQUIRE(box.run("forward --config " + cfg.string() + " --out " + data) == 0);
    for (const char* f : {"phantom_u0.npat", "phantom_u1.npat", "region.npat", "trace_plus.npat",
                          "trace_minus.npat", "manifest.ini"}) {
      CHECK(fs::exists(fs::path(data) / f));
    }
    const npat::Ini man = npat::Ini::load((fs::path(data) / "manifest.ini").string());
    const double dt = std::stod(*man.find("run", "dt"));
    const int n_steps = std::stoi(*man.find("run", "n_steps"));
    CHECK(dt * n_steps == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(dt == doctest::Approx(std::stod(*man.find("run", "cfl_effective")) * 0.05).epsilon(1e-12));
    const auto trace = npat::read_trace((fs::path(data) / "trace_plus.npat").string());
    CHECK(trace.n_samples() == static_cast<std::size_t>(n_steps + 1));
    CHECK(trace.dt == doctest::Approx(dt).epsilon(1e-15));

    const std::string r1 = (box.dir / "r1").string(), r2 = (box.dir / "r2").string();
    std::string out;
    REQUIRE(box.run("reconstruct --config " + cfg.string() + " --data " + data + " --out " + r1, &out) == 0);
    REQUIRE(box.run("reconstruct --config " + cfg.string() + " --data " + data + " --out " + r2 +
                    " --threads 4") == 0);
    for (const char* f : {"estimate_u0.npat", "estimate_u1.npat", "iterate_0002_u0.npat", "iterate_0004_u1.npat",
                          "estimate_u0.pgm"}) {
      CHECK(fs::exists(fs::path(r1) / f));
      CHECK(slurp(fs::path(r1) / f) == slurp(fs::path(r2) / f));
    }
    CHECK_FALSE(fs::exists(fs::path(r1) / "iterate_0003_u0.npat"));
    const std::string csv = slurp(fs::path(r1) / "convergence.csv");
    CHECK(csv.rfind("iter,error,update,rate,seconds\n", 0) == 0);
    const npat::Ini rman = npat::Ini::load((fs::path(r1) / "manifest.ini").string());
    CHECK(*rman.find("run", "iterations") == "5");

    // the stride flag overrides the config
    const std::string r3 = (box.dir / "r3").string();
    REQUIRE(box.run("reconstruct --config " + cfg.string() + " --data " + data + " --out " + r3 + " --stride 0") ==
            0);
    CHECK_FALSE(fs::exists(fs::path(r3) / "iterate_0002_u0.npat"));

    // a different grid in the reconstruction config
    const auto other = box.write("other.ini", with(kSmall, "h = 0.05", "h = 0.025"));
    CHECK(box.run("reconstruct --config " + other.string() + " --data " + data + " --out " +
                      (box.dir / "r4").string(),
                  &out) == 3);
    CHECK(out.find("GeometryMismatch") != std::string::npos);

    const auto zero = box.write("zero.ini", with(kSmall, "j_max = 5", "j_max = 0"));
    CHECK(box.run("reconstruct --config " + zero.string() + " --data " + data + " --out " +
                  (box.dir / "r5").string()) == 1);
  }

  TEST_CASE("vc and doi") {
    Sandbox box;
    const auto cfg = box.write("small.ini", kSmall);
    std::string out;
    REQUIRE(box.run("vc --config " + cfg.string() + " --out " + (box.dir / "vc").string(), &out) == 0);
    CHECK(out.find("pass=true fraction=1.000000") != std::string::npos);
    CHECK(fs::exists(box.dir / "vc" / "visibility.csv"));
    CHECK(fs::exists(box.dir / "vc" / "heatmap.npat"));

    const auto shortT = box.write("short.ini", with(kSmall, "T = 0.9\n", "T = 0.1\n"));
    REQUIRE(box.run("vc --config " + shortT.string() + " --out " + (box.dir / "vc2").string(), &out) == 0);
    CHECK(out.find("pass=false") != std::string::npos);

    REQUIRE(box.run("doi --config " + cfg.string() + " --out " + (box.dir / "doi").string()) == 0);
    CHECK(fs::exists(box.dir / "doi" / "travel_time.npat"));
    CHECK(fs::exists(box.dir / "doi" / "doi_mask.npat"));
  }

  TEST_CASE("audit") {
    Sandbox box;
    std::string out;
    const auto cfg = box.write("audit.ini", with(kSmall, "[vc]", "[audit]\nresolutions = 0.025\n\n[vc]"));
    REQUIRE(box.run("audit --config " + cfg.string() + " --out " + (box.dir / "a").string(), &out) == 0);
    CHECK(out.find("order=") != std::string::npos);
    const std::string csv = slurp(box.dir / "a" / "audit.csv");
    CHECK(csv.rfind("step,time,energy,energy_star,flux,balance_residual\n", 0) == 0);
    CHECK(fs::exists(box.dir / "a" / "audit_refinement.csv"));

    // without measurement the solve is a pure Neumann solve
    const auto dark = box.write("dark.ini", with(kSmall, "h = 0.05", "h = 0.05\nchi0_scale = 0"));
    REQUIRE(box.run("audit --config " + dark.string() + " --out " + (box.dir / "b").string()) == 0);
    std::istringstream rows(slurp(box.dir / "b" / "audit.csv"));
    std::string line;
    std::getline(rows, line);
    double e0 = -1.0;
    int n = 0;
    while (std::getline(rows, line)) {
      std::vector<double> v;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
      REQUIRE(v.size() == 6);
      if (e0 < 0) e0 = v[2];
      CHECK(std::abs(v[2] - e0) <= 1e-10 * e0);
      CHECK(v[4] == 0.0);
      ++n;
    }
    CHECK(n > 10);
  }
}
