#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <complex>
#include <cstring>

#include "qshadow/analysis.hpp"
#include "qshadow/field.hpp"
#include "qshadow/io.hpp"
#include "qshadow/montecarlo.hpp"
#include "qshadow/runner.hpp"
#include "qshadow/theory.hpp"

namespace py = pybind11;
using namespace qshadow;

namespace {

Grid grid_from_shape(const py::buffer_info& info) {
  if (info.ndim != 2) throw ParameterError("expected a 2D array");
  return Grid(static_cast<int>(info.shape[1]), static_cast<int>(info.shape[0]));
}

field::ComplexField field_from_array(
    const py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>& a) {
  const auto info = a.request();
  field::ComplexField f(grid_from_shape(info));
  std::memcpy(f.amp.data(), info.ptr, f.amp.size() * sizeof(std::complex<double>));
  return f;
}

py::array_t<std::complex<double>> field_to_array(const field::ComplexField& f) {
  py::array_t<std::complex<double>> out({f.grid.height, f.grid.width});
  std::memcpy(out.mutable_data(), f.amp.data(), f.amp.size() * sizeof(std::complex<double>));
  return out;
}

field::Mask mask_from_array(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  const auto info = a.request();
  field::Mask m(grid_from_shape(info));
  std::memcpy(m.t.data(), info.ptr, m.t.size() * sizeof(double));
  return m;
}

py::array_t<double> mask_to_array(const field::Mask& m) {
  py::array_t<double> out({m.grid.height, m.grid.width});
  std::memcpy(out.mutable_data(), m.t.data(), m.t.size() * sizeof(double));
  return out;
}

ScalarMap map_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                         MapRole role) {
  const auto info = a.request();
  ScalarMap m(grid_from_shape(info), role);
  std::memcpy(m.values.data(), info.ptr, m.values.size() * sizeof(double));
  return m;
}

py::array_t<double> map_values(const ScalarMap& m) {
  py::array_t<double> out({m.grid.height, m.grid.width});
  std::memcpy(out.mutable_data(), m.values.data(), m.values.size() * sizeof(double));
  return out;
}

py::array_t<bool> map_valid(const ScalarMap& m) {
  py::array_t<bool> out({m.grid.height, m.grid.width});
  bool* dst = out.mutable_data();
  for (std::size_t i = 0; i < m.valid.size(); ++i) dst[i] = m.valid[i] != 0;
  return out;
}

py::array_t<double> frames_to_array(const mc::FrameStack& s) {
  py::array_t<double> out({s.frames, s.grid.height, s.grid.width});
  std::memcpy(out.mutable_data(), s.data.data(), s.data.size() * sizeof(double));
  return out;
}

CrossSection cross_section_from_arrays(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& values,
    const py::object& valid, int row, int x_start) {
  CrossSection cs;
  cs.row = row;
  cs.x_start = x_start;
  const auto info = values.request();
  if (info.ndim != 1) throw ParameterError("profile must be 1D");
  cs.values.assign(static_cast<const double*>(info.ptr),
                   static_cast<const double*>(info.ptr) + info.shape[0]);
  if (valid.is_none()) {
    cs.valid.assign(cs.values.size(), 1);
  } else {
    const auto v = py::cast<py::array_t<bool, py::array::c_style | py::array::forcecast>>(valid);
    const auto vinfo = v.request();
    if (vinfo.ndim != 1 || vinfo.shape[0] != info.shape[0]) {
      throw ParameterError("valid mask must match the profile length");
    }
    cs.valid.resize(cs.values.size());
    const bool* src = static_cast<const bool*>(vinfo.ptr);
    for (std::size_t i = 0; i < cs.valid.size(); ++i) cs.valid[i] = src[i] ? 1 : 0;
  }
  return cs;
}

theory::Quadrature quadrature_from_string(const std::string& s) {
  if (s == "anti_squeezed") return theory::Quadrature::AntiSqueezed;
  if (s == "squeezed") return theory::Quadrature::Squeezed;
  throw ParameterError("quadrature must be 'anti_squeezed' or 'squeezed'");
}

py::dict manifest_to_dict(const runner::RunManifest& m) {
  py::dict d;
  d["command"] = m.command;
  d["config_hash"] = m.config_hash;
  d["master_seed"] = m.master_seed;
  d["wall_clock_ms"] = m.wall_clock_ms;
  d["files"] = m.files;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Squeezed-vacuum shadow imaging simulator (native core)";

  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<PhysicalityError>(m, "PhysicalityError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<Grid>(m, "Grid")
      .def(py::init<int, int, double>(), py::arg("width"), py::arg("height"),
           py::arg("pitch") = 1.0)
      .def_readonly("width", &Grid::width)
      .def_readonly("height", &Grid::height)
      .def_readonly("pitch", &Grid::pitch)
      .def("__repr__", [](const Grid& g) {
        return "Grid(" + std::to_string(g.width) + ", " + std::to_string(g.height) + ")";
      });

  py::class_<field::ComplexField>(m, "ComplexField")
      .def(py::init(&field_from_array), py::arg("amplitudes"))
      .def_property_readonly("grid", [](const field::ComplexField& f) { return f.grid; })
      .def_property_readonly("amplitudes", &field_to_array)
      .def("energy", &field::ComplexField::energy)
      .def("is_normalized", &field::ComplexField::is_normalized, py::arg("tol") = 1e-9)
      .def("intensity_map", &field::ComplexField::intensity_map);

  py::class_<field::Mask>(m, "Mask")
      .def(py::init(&mask_from_array), py::arg("transmission"))
      .def_property_readonly("grid", [](const field::Mask& m_) { return m_.grid; })
      .def_property_readonly("transmission", &mask_to_array);

  py::class_<ScalarMap>(m, "ScalarMap")
      .def(py::init([](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                       const std::string& role) { return map_from_array(a, map_role_from_string(role)); }),
           py::arg("values"), py::arg("role") = "intensity")
      .def_property_readonly("grid", [](const ScalarMap& s) { return s.grid; })
      .def_property_readonly("values", &map_values)
      .def_property_readonly("valid", &map_valid)
      .def_property_readonly("role", [](const ScalarMap& s) { return std::string(to_string(s.role)); })
      .def("valid_mean", &ScalarMap::valid_mean);

  py::class_<DetectionDisc>(m, "DetectionDisc")
      .def(py::init<int>(), py::arg("radius"))
      .def_readonly("radius", &DetectionDisc::radius);

  py::class_<CrossSection>(m, "CrossSection")
      .def(py::init(&cross_section_from_arrays), py::arg("values"), py::arg("valid") = py::none(),
           py::arg("row") = 0, py::arg("x_start") = 0)
      .def_readonly("row", &CrossSection::row)
      .def_readonly("x_start", &CrossSection::x_start)
      .def_property_readonly("values",
                             [](const CrossSection& cs) {
                               return py::array_t<double>(cs.values.size(), cs.values.data());
                             })
      .def_property_readonly("valid", [](const CrossSection& cs) {
        py::array_t<bool> out(cs.valid.size());
        for (std::size_t i = 0; i < cs.valid.size(); ++i) out.mutable_data()[i] = cs.valid[i] != 0;
        return out;
      });

  py::class_<theory::SqueezerParams>(m, "SqueezerParams")
      .def(py::init([](double r, const std::string& quadrature, double phase) {
             return theory::SqueezerParams(r, quadrature_from_string(quadrature), phase);
           }),
           py::arg("r"), py::arg("quadrature") = "anti_squeezed", py::arg("phase") = 0.0)
      .def_static(
          "from_db",
          [](double db, const std::string& quadrature, double phase) {
            return theory::SqueezerParams::from_db(db, quadrature_from_string(quadrature), phase);
          },
          py::arg("db"), py::arg("quadrature") = "anti_squeezed", py::arg("phase") = 0.0)
      .def_readonly("r", &theory::SqueezerParams::r)
      .def_readonly("phase", &theory::SqueezerParams::phase)
      .def("variance_factor", &theory::SqueezerParams::variance_factor)
      .def("mean_photons", &theory::SqueezerParams::mean_photons);

  py::class_<mc::CameraParams>(m, "CameraParams")
      .def(py::init([](const Grid& grid, double dark_mean, double dark_var, int frames,
                       double exposure_s, bool poissonize_ports, bool round_counts) {
             mc::CameraParams cam;
             cam.grid = grid;
             cam.dark_mean = dark_mean;
             cam.dark_var = dark_var;
             cam.frames_per_cluster = frames;
             cam.exposure_s = exposure_s;
             cam.poissonize_ports = poissonize_ports;
             cam.round_counts = round_counts;
             cam.validate();
             return cam;
           }),
           py::arg("grid"), py::arg("dark_mean") = 0.0, py::arg("dark_var") = 0.0,
           py::arg("frames_per_cluster") = 4, py::arg("exposure_s") = 0.0,
           py::arg("poissonize_ports") = false, py::arg("round_counts") = false)
      .def_readonly("dark_mean", &mc::CameraParams::dark_mean)
      .def_readonly("dark_var", &mc::CameraParams::dark_var)
      .def_readonly("frames_per_cluster", &mc::CameraParams::frames_per_cluster);

  py::class_<mc::Scene>(m, "Scene")
      .def(py::init([](const field::ComplexField& u1, const field::ComplexField& u2,
                       const theory::SqueezerParams& sq, double lo_photons_per_frame) {
             mc::Scene s{u1, u2, sq, lo_photons_per_frame};
             s.validate();
             return s;
           }),
           py::arg("u1"), py::arg("u2"), py::arg("squeezer"), py::arg("lo_photons_per_frame"));

  py::class_<mc::KineticCluster>(m, "KineticCluster")
      .def_property_readonly("port1",
                             [](const mc::KineticCluster& c) { return frames_to_array(c.port1); })
      .def_property_readonly("port2",
                             [](const mc::KineticCluster& c) { return frames_to_array(c.port2); })
      .def_property_readonly("master_seed",
                             [](const mc::KineticCluster& c) { return c.lineage.master_seed; })
      .def_property_readonly("cluster_index",
                             [](const mc::KineticCluster& c) { return c.lineage.cluster_index; });

  py::class_<mc::SceneSampler>(m, "SceneSampler")
      .def(py::init<mc::Scene, mc::CameraParams>(), py::arg("scene"), py::arg("camera"))
      .def("synthesize", &mc::SceneSampler::synthesize, py::arg("master_seed"),
           py::arg("cluster_index"))
      .def_property_readonly("span_rank", &mc::SceneSampler::span_rank);

  // field operations
  m.def("gaussian_mode", &field::gaussian_mode, py::arg("grid"), py::arg("waist_px"),
        py::arg("center_x"), py::arg("center_y"));
  m.def(
      "rect_mask",
      [](const Grid& g, int x0, int y0, int x1, int y1, bool inverted) {
        return field::rect_mask(g, x0, y0, x1, y1, inverted);
      },
      py::arg("grid"), py::arg("x0"), py::arg("y0"), py::arg("x1"), py::arg("y1"),
      py::arg("inverted") = false);
  m.def("apply_mask", &field::apply_mask, py::arg("field"), py::arg("mask"));
  m.def("propagate", &field::propagate, py::arg("field"), py::arg("distance"),
        py::arg("wavelength"), py::arg("pad_factor") = 1);

  // analytic theory
  m.def("pixel_variance_map", &theory::pixel_variance_map, py::arg("u1"), py::arg("squeezer"));
  m.def("binned_variance_general", &theory::binned_variance_general, py::arg("u1"), py::arg("u2"),
        py::arg("squeezer"), py::arg("disc"), py::arg("floor_frac") = 1e-6);
  m.def("binned_variance_mode_matched", &theory::binned_variance_mode_matched, py::arg("mask"),
        py::arg("u2"), py::arg("squeezer"), py::arg("disc"), py::arg("floor_frac") = 1e-6);
  m.def("expected_variance", &theory::expected_variance, py::arg("t_map"), py::arg("overlap_sq"),
        py::arg("squeezer"));
  m.def("ideal_transmission_map", &theory::ideal_transmission_map, py::arg("mask"), py::arg("u2"),
        py::arg("squeezer"), py::arg("disc"), py::arg("vr_floor") = 0.05);
  m.def("snr_traditional", &theory::snr_traditional, py::arg("n_mean"), py::arg("dark_var"));
  m.def("snr_quantum", &theory::snr_quantum, py::arg("variance"));
  m.def(
      "snr_ratio",
      [](double r, double dark_var) {
        const auto out = theory::snr_ratio(r, dark_var);
        return py::make_tuple(out.exact, out.approximate);
      },
      py::arg("r"), py::arg("dark_var"), "returns (exact, approximate)");
  m.def("photon_budget", &theory::photon_budget, py::arg("n_sq"), py::arg("t_expo"),
        py::arg("t_coh"), py::arg("frames"));

  // Monte Carlo synthesis
  m.def("synthesize_quantum_cluster", &mc::synthesize_quantum_cluster, py::arg("scene"),
        py::arg("camera"), py::arg("master_seed"), py::arg("cluster_index"));
  m.def(
      "synthesize_classical_cluster",
      [](const ScalarMap& intensity, const mc::CameraParams& cam, std::uint64_t seed,
         std::uint64_t index) {
        return frames_to_array(mc::synthesize_classical_cluster(intensity, cam, seed, index));
      },
      py::arg("intensity"), py::arg("camera"), py::arg("master_seed"), py::arg("cluster_index"));
  m.def("derive_stream_seed", &util::derive_stream_seed, py::arg("master"),
        py::arg("cluster_index"), py::arg("frame_index"));

  // analysis
  m.def("bin_counts", &analysis::bin_counts, py::arg("map"), py::arg("disc"));
  m.def(
      "estimate_variance_map",
      [](const std::vector<mc::KineticCluster>& clusters, const DetectionDisc& disc,
         double denominator_floor, bool mean_subtract) {
        analysis::VarianceOptions options;
        options.denominator_floor = denominator_floor;
        options.mean_subtract = mean_subtract;
        return analysis::estimate_variance_map(clusters, disc, options);
      },
      py::arg("clusters"), py::arg("disc"), py::arg("denominator_floor") = 1e-9,
      py::arg("mean_subtract") = false);
  m.def("transmission_quantum", &analysis::transmission_quantum, py::arg("v_probe"),
        py::arg("v_ref"), py::arg("floor"), py::arg("clamp") = false);
  m.def("transmission_traditional", &analysis::transmission_traditional, py::arg("n_probe"),
        py::arg("n_ref"), py::arg("floor"));
  m.def("similarity", &analysis::similarity, py::arg("t_exp"), py::arg("t_obj"));
  m.def("to_decibels", &analysis::to_decibels, py::arg("v"));
  m.def("cross_section", &analysis::cross_section, py::arg("map"), py::arg("row"),
        py::arg("x_start"), py::arg("span"));

  // container I/O
  m.def("write_field", &io::write_field, py::arg("field"), py::arg("path"));
  m.def("read_field", &io::read_field, py::arg("path"));
  m.def("write_map_csv", &io::write_map_csv, py::arg("map"), py::arg("path"));
  m.def(
      "read_map_csv",
      [](const io::fs::path& path, const std::string& role) {
        return io::read_map_csv(path, map_role_from_string(role));
      },
      py::arg("path"), py::arg("role") = "intensity");
  m.def("write_map_pgm16", &io::write_map_pgm16, py::arg("map"), py::arg("path"),
        py::arg("config_hash") = std::string());
  m.def("write_cluster", &io::write_cluster, py::arg("cluster"), py::arg("path"),
        py::arg("scene_hash") = std::string());
  m.def("read_cluster", &io::read_cluster, py::arg("path"));

  // experiment runner
  py::class_<runner::ExperimentConfig>(m, "ExperimentConfig")
      .def_static("from_json_file", &runner::ExperimentConfig::from_json_file, py::arg("path"))
      .def_static("from_json_text", &runner::ExperimentConfig::from_json_text, py::arg("text"))
      .def_readwrite("out_dir", &runner::ExperimentConfig::out_dir)
      .def_readwrite("master_seed", &runner::ExperimentConfig::master_seed)
      .def_readwrite("workers", &runner::ExperimentConfig::workers)
      .def_readwrite("bit_exact", &runner::ExperimentConfig::bit_exact)
      .def_property_readonly("config_hash", &runner::ExperimentConfig::config_hash);
  m.def("run_theory", [](const runner::ExperimentConfig& c) { return manifest_to_dict(runner::run_theory(c)); });
  m.def("run_simulate",
        [](const runner::ExperimentConfig& c) { return manifest_to_dict(runner::run_simulate(c)); });
  m.def("run_classical",
        [](const runner::ExperimentConfig& c) { return manifest_to_dict(runner::run_classical(c)); });
  m.def("run_sweep", [](const runner::ExperimentConfig& c) { return manifest_to_dict(runner::run_sweep(c)); });
}
