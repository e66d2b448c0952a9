#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "npat/commands.hpp"
#include "npat/config.hpp"
#include "npat/error.hpp"
#include "npat/geometry.hpp"
#include "npat/operators.hpp"
#include "npat/parallel.hpp"
#include "npat/phantoms.hpp"
#include "npat/rays.hpp"
#include "npat/reconstruct.hpp"

namespace py = pybind11;
using namespace npat;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using MaskArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

// Fields cross the boundary as (ny, nx) arrays, row j holding y = y0 + j*h.
Array to_array(const Grid& g, const Field& f) {
  Array a({g.ny, g.nx});
  std::copy(f.begin(), f.end(), a.mutable_data());
  return a;
}

Field to_field(const Grid& g, const Array& a) {
  if (a.ndim() != 2 || a.shape(0) != g.ny || a.shape(1) != g.nx) {
    throw Error(ErrorKind::GeometryMismatch, "array shape does not match the grid (expected (ny, nx))");
  }
  return Field(a.data(), a.data() + a.size());
}

RegionMask to_mask(const Grid& g, const MaskArray& a) {
  if (a.ndim() != 2 || a.shape(0) != g.ny || a.shape(1) != g.nx) {
    throw Error(ErrorKind::GeometryMismatch, "mask shape does not match the grid (expected (ny, nx))");
  }
  std::vector<std::uint8_t> m(a.data(), a.data() + a.size());
  for (auto& v : m) v = v != 0;
  return make_region(g, std::move(m));
}

py::array_t<bool> mask_array(const Grid& g, const RegionMask& m) {
  py::array_t<bool> a({g.ny, g.nx});
  for (std::size_t k = 0; k < m.mask.size(); ++k) a.mutable_data()[k] = m.mask[k] != 0;
  return a;
}

StatePair pair(const Setup& s, const Array& u0, const Array& u1) {
  return {to_field(s.grid, u0), to_field(s.grid, u1)};
}

py::tuple out(const Setup& s, const StatePair& p) {
  return py::make_tuple(to_array(s.grid, p.u0), to_array(s.grid, p.u1));
}

py::array_t<double> trace_array(const MeasurementTrace& t) {
  py::array_t<double> a({static_cast<py::ssize_t>(t.n_samples()), static_cast<py::ssize_t>(t.n_nodes())});
  std::copy(t.values.begin(), t.values.end(), a.mutable_data());
  return a;
}

py::dict log_dict(const ConvergenceLog& log) {
  std::vector<double> err, upd;
  for (const auto& r : log.records) {
    err.push_back(r.error);
    upd.push_back(r.update);
  }
  py::dict d;
  d["error"] = err;
  d["update"] = upd;
  d["rate"] = log.rate;
  d["r2"] = log.r2;
  d["warnings"] = log.warnings;
  return d;
}

}  // namespace

PYBIND11_MODULE(_npat, m) {
  m.doc() = "Back-and-forth nudging time reversal for 2D photoacoustic tomography";

  static py::exception<Error> npat_error(m, "NpatError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = npat_error;
      py::object inst = exc(e.what());
      inst.attr("kind") = to_string(e.kind());
      PyErr_SetObject(npat_error.ptr(), inst.ptr());
    }
  });

  m.def("set_threads", &set_threads, py::arg("n"));
  m.def("threads", &threads);

  py::class_<Grid>(m, "Grid")
      .def_readonly("nx", &Grid::nx)
      .def_readonly("ny", &Grid::ny)
      .def_readonly("h", &Grid::h)
      .def_readonly("x0", &Grid::x0)
      .def_readonly("y0", &Grid::y0)
      .def("coords", [](const Grid& g) {
        std::vector<double> x(static_cast<std::size_t>(g.nx)), y(static_cast<std::size_t>(g.ny));
        for (int i = 0; i < g.nx; ++i) x[static_cast<std::size_t>(i)] = g.x(i);
        for (int j = 0; j < g.ny; ++j) y[static_cast<std::size_t>(j)] = g.y(j);
        return py::make_tuple(py::array(py::cast(x)), py::array(py::cast(y)));
      });

  py::class_<Setup>(m, "Setup")
      .def_readonly("grid", &Setup::grid)
      .def_property_readonly("T", [](const Setup& s) { return s.time.T; })
      .def_property_readonly("dt", [](const Setup& s) { return s.time.dt; })
      .def_property_readonly("n_steps", [](const Setup& s) { return s.time.n_steps; })
      .def_property_readonly("speed", [](const Setup& s) { return to_array(s.grid, s.speed.values()); })
      .def_property_readonly("chi0", [](const Setup& s) { return to_array(s.grid, s.boundary.chi0); })
      .def_property_readonly("measurement_nodes", [](const Setup& s) { return s.measurement; });

  m.def(
      "corner_setup",
      [](double arm_length, double pad, double h, double T, double cfl, std::optional<Array> speed) {
        auto [g, b] = build_corner_geometry(arm_length, pad, h);
        SpeedField c = speed ? SpeedField(g, to_field(g, *speed)) : SpeedField::constant(g, 1.0);
        return make_setup(g, c, b, T, cfl);
      },
      py::arg("arm_length"), py::arg("pad"), py::arg("h"), py::arg("T"), py::arg("cfl") = 0.45,
      py::arg("speed") = py::none(), "Corner geometry with unit speed unless a (ny, nx) speed array is given.");

  m.def(
      "load_config",
      [](const std::string& path, double h) {
        const RunConfig cfg = load_config(path);
        const Setup s = build_setup(cfg, h);
        py::object phantom = py::none();
        py::object K = py::none();
        if (cfg.has_phantom) {
          const StatePair v0 = build_phantom(cfg, s);
          phantom = out(s, v0);
          K = mask_array(s.grid, build_region(cfg, s, &v0));
        } else {
          K = mask_array(s.grid, build_region(cfg, s, nullptr));
        }
        return py::make_tuple(s, phantom, K);
      },
      py::arg("path"), py::arg("h") = 0.0, "Returns (setup, phantom pair or None, K mask) for a config file.");

  m.def(
      "phantom",
      [](const Setup& s, const std::vector<std::pair<double, double>>& centers, const std::vector<double>& radii,
         std::vector<double> amplitudes, std::optional<std::vector<double>> velocity_amplitudes) {
        PhantomSpec p;
        p.kind = centers.size() == 1 ? PhantomKind::Bump : PhantomKind::MultiBump;
        for (auto [x, y] : centers) p.centers.push_back({x, y});
        p.radii = radii;
        p.amplitudes = std::move(amplitudes);
        if (velocity_amplitudes) {
          p.velocity_part = true;
          p.velocity_amplitudes = *velocity_amplitudes;
        }
        return out(s, make_phantom(p, s.grid));
      },
      py::arg("setup"), py::arg("centers"), py::arg("radii"), py::arg("amplitudes") = std::vector<double>{},
      py::arg("velocity_amplitudes") = py::none());

  py::class_<Traces>(m, "Traces")
      .def_property_readonly("plus", [](const Traces& t) { return trace_array(t.plus); })
      .def_property_readonly("minus", [](const Traces& t) { return trace_array(t.minus); })
      .def_property_readonly("dt", [](const Traces& t) { return t.plus.dt; });

  m.def(
      "lambda_op", [](const Setup& s, const Array& u0, const Array& u1) { return lambda_op(pair(s, u0, u1), s); },
      py::arg("setup"), py::arg("u0"), py::arg("u1"));
  m.def(
      "nudge_cycle",
      [](const Setup& s, const Array& u0, const Array& u1, const Traces& d) {
        return out(s, nudge_cycle(pair(s, u0, u1), d, s));
      },
      py::arg("setup"), py::arg("u0"), py::arg("u1"), py::arg("data"));
  m.def(
      "s_cycle", [](const Setup& s, const Array& u0, const Array& u1) { return out(s, s_cycle(pair(s, u0, u1), s)); },
      py::arg("setup"), py::arg("u0"), py::arg("u1"));
  m.def(
      "project_K",
      [](const Setup& s, const Array& u0, const Array& u1, const MaskArray& K, double tol) {
        return out(s, project_K(pair(s, u0, u1), to_mask(s.grid, K), s, tol));
      },
      py::arg("setup"), py::arg("u0"), py::arg("u1"), py::arg("K"), py::arg("tol") = kDefaultCgTolerance);
  m.def(
      "apply_R",
      [](const Setup& s, const Array& u0, const Array& u1, const MaskArray& K, double tol) {
        return out(s, apply_R(pair(s, u0, u1), to_mask(s.grid, K), s, tol));
      },
      py::arg("setup"), py::arg("u0"), py::arg("u1"), py::arg("K"), py::arg("tol") = kDefaultCgTolerance);
  m.def(
      "energy_inner",
      [](const Setup& s, const Array& a0, const Array& a1, const Array& b0, const Array& b1) {
        return energy_inner(pair(s, a0, a1), pair(s, b0, b1), s);
      },
      py::arg("setup"), py::arg("a0"), py::arg("a1"), py::arg("b0"), py::arg("b1"));
  m.def(
      "energy_norm", [](const Setup& s, const Array& u0, const Array& u1) { return energy_norm(pair(s, u0, u1), s); },
      py::arg("setup"), py::arg("u0"), py::arg("u1"));

  m.def(
      "reconstruct",
      [](const Setup& s, const Traces& data, const MaskArray& K, int n_iter, const std::string& method,
         double cg_tol, std::optional<std::pair<Array, Array>> truth) {
        const RegionMask k = to_mask(s.grid, K);
        std::optional<StatePair> t;
        if (truth) t = pair(s, truth->first, truth->second);
        ReconstructResult r;
        if (method == "nudging") {
          ReconstructOptions o;
          o.j_max = n_iter;
          o.cg_tol = cg_tol;
          r = reconstruct_nudging(data, k, s, o, t ? &*t : nullptr);
        } else if (method == "neumann") {
          r = reconstruct_neumann_series(data, k, s, n_iter, cg_tol, t ? &*t : nullptr);
        } else {
          throw Error(ErrorKind::InvalidArgument, "method must be 'nudging' or 'neumann'");
        }
        return py::make_tuple(out(s, r.estimate), log_dict(r.log));
      },
      py::arg("setup"), py::arg("data"), py::arg("K"), py::arg("n_iter") = 30, py::arg("method") = "nudging",
      py::arg("cg_tol") = kDefaultCgTolerance, py::arg("truth") = py::none(),
      "Returns ((u0, u1), log) with log keys error, update, rate, r2, warnings.");

  m.def(
      "travel_times", [](const Setup& s) { return to_array(s.grid, travel_times(s.grid, s.speed, s.boundary)); },
      py::arg("setup"));
  m.def(
      "domain_of_influence",
      [](const Setup& s, double T) {
        return mask_array(s.grid, domain_of_influence(s.grid, s.speed, s.boundary, T));
      },
      py::arg("setup"), py::arg("T"));

  m.def(
      "trace_ray",
      [](const Setup& s, std::pair<double, double> x, std::pair<double, double> dir, double T) {
        const SpeedModel model = SpeedModel::from_grid(s.grid, s.speed);
        const RayHit hit = trace_ray({x.first, x.second}, {dir.first, dir.second}, T, s.grid, s.boundary, model);
        py::dict d;
        d["outcome"] = to_string(hit.outcome);
        d["x"] = py::make_tuple(hit.state.x.x, hit.state.x.y);
        d["t"] = hit.state.t;
        d["cos_incidence"] = hit.cos_incidence;
        d["slowness_drift"] = hit.slowness_drift;
        return d;
      },
      py::arg("setup"), py::arg("x"), py::arg("dir"), py::arg("T"));
  m.def(
      "check_visibility",
      [](const Setup& s, const MaskArray& K, double T, int n_dirs) {
        const SpeedModel model = SpeedModel::from_grid(s.grid, s.speed);
        const VisibilityReport r = check_visibility(to_mask(s.grid, K), T, n_dirs, s.grid, s.boundary, model);
        return py::make_tuple(r.pass, r.fraction);
      },
      py::arg("setup"), py::arg("K"), py::arg("T"), py::arg("n_dirs") = 64, "Returns (pass, visible fraction).");
}
