#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "snakecpg/describing.hpp"
#include "snakecpg/errors.hpp"
#include "snakecpg/gp.hpp"
#include "snakecpg/measure.hpp"
#include "snakecpg/plant.hpp"
#include "snakecpg/ppoc.hpp"
#include "snakecpg/rollout.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace snakecpg;

namespace {

py::array_t<double> column_matrix(const std::vector<std::array<double, 4>>& rows) {
  py::array_t<double> out({static_cast<py::ssize_t>(rows.size()), py::ssize_t{4}});
  auto m = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < 4; ++j) m(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(j)) = rows[i][j];
  }
  return out;
}

KeyValueConfig kv_from(const std::map<std::string, py::object>& options) {
  KeyValueConfig kv;
  for (const auto& [k, v] : options) kv.set(k, py::str(v).cast<std::string>());
  return kv;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Matsuoka CPG snake laboratory";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

  py::class_<cpg::OscillatorParams>(m, "OscillatorParams")
      .def(py::init<>())
      .def_readwrite("tau_r", &cpg::OscillatorParams::tau_r)
      .def_readwrite("tau_a", &cpg::OscillatorParams::tau_a)
      .def_readwrite("a", &cpg::OscillatorParams::a)
      .def_readwrite("b", &cpg::OscillatorParams::b)
      .def_readwrite("w_down", &cpg::OscillatorParams::w_down)
      .def_readwrite("w_up", &cpg::OscillatorParams::w_up)
      .def_readwrite("K_f", &cpg::OscillatorParams::K_f)
      .def_readwrite("c", &cpg::OscillatorParams::c)
      .def_readwrite("A_z", &cpg::OscillatorParams::A_z)
      .def("check", &cpg::OscillatorParams::check);

  py::class_<sim::PhysicsParams>(m, "PhysicsParams")
      .def(py::init<>())
      .def_readwrite("ground_friction", &sim::PhysicsParams::ground_friction)
      .def_readwrite("wheel_friction", &sim::PhysicsParams::wheel_friction)
      .def_readwrite("rigid_body_mass", &sim::PhysicsParams::rigid_body_mass)
      .def_readwrite("tail_mass", &sim::PhysicsParams::tail_mass)
      .def_readwrite("head_mass", &sim::PhysicsParams::head_mass)
      .def_readwrite("max_link_pressure", &sim::PhysicsParams::max_link_pressure)
      .def_readwrite("gravity_angle", &sim::PhysicsParams::gravity_angle)
      .def_readwrite("actuator_lag", &sim::PhysicsParams::actuator_lag)
      .def_readwrite("bend_per_psi", &sim::PhysicsParams::bend_per_psi)
      .def("check", &sim::PhysicsParams::check);

  m.def("validate_params", [](const cpg::OscillatorParams& p) {
    const auto r = cpg::validate_params(p);
    return py::dict("oscillation_possible"_a = r.oscillation_possible, "lhs"_a = r.lhs, "rhs"_a = r.rhs);
  });

  m.def(
      "simulate",
      [](const cpg::OscillatorParams& p, double u_e, double u_f, double duration, double dt) {
        const auto traj = cpg::simulate(p, cpg::constant_schedule(cpg::TonicInputs::uniform(u_e, u_f)), duration,
                                        dt, cpg::NetworkState::seeded());
        std::vector<std::array<double, 4>> psi;
        for (const auto& o : traj.output) psi.push_back(o.psi);
        return py::dict("time"_a = py::array(py::cast(traj.time)), "psi"_a = column_matrix(psi));
      },
      py::arg("params") = cpg::OscillatorParams{}, py::arg("u_e") = 1.0, py::arg("u_f") = 1.0,
      py::arg("duration") = 20.0, py::arg("dt") = 1e-3);

  m.def("gate_fourier_K", &df::gate_fourier_K);
  m.def("gate_fourier_L", &df::gate_fourier_L);
  m.def("inverse_K", &df::inverse_K);
  m.def("harmonic_gain", &df::harmonic_gain);
  m.def("natural_frequency", &df::natural_frequency);
  m.def("free_amplitude", &df::free_amplitude);
  m.def("entrainment_threshold", &df::entrainment_threshold, py::arg("omega"), py::arg("params"));
  m.def("predict_bias_constant", &df::predict_bias_constant, py::arg("u_e"), py::arg("params"));

  py::class_<df::SignalStats>(m, "SignalStats")
      .def_readonly("bias", &df::SignalStats::bias)
      .def_readonly("amplitude", &df::SignalStats::amplitude)
      .def_readonly("frequency", &df::SignalStats::frequency)
      .def_readonly("duty", &df::SignalStats::duty)
      .def_readonly("is_limit_cycle", &df::SignalStats::is_limit_cycle)
      .def_readonly("periods", &df::SignalStats::periods);

  m.def(
      "measure_signal",
      [](const std::vector<double>& x, double dt, double transient_cut) {
        return df::measure_signal(x, dt, transient_cut);
      },
      py::arg("x"), py::arg("dt"), py::arg("transient_cut") = 0.0);

  m.def(
      "velocity_sweep",
      [](const std::vector<double>& c_grid, const std::vector<double>& kf_grid, const sim::PhysicsParams& phys,
         double duration, unsigned workers) {
        sim::VelocitySweepOptions opts;
        opts.duration = duration;
        opts.workers = workers;
        py::list out;
        for (const auto& cell : sim::velocity_sweep(c_grid, kf_grid, phys, {}, {}, opts)) {
          out.append(py::dict("c"_a = cell.c, "K_f"_a = cell.K_f, "speed"_a = cell.speed, "ok"_a = cell.ok));
        }
        return out;
      },
      py::arg("c_grid"), py::arg("kf_grid"), py::arg("physics") = sim::PhysicsParams{}, py::arg("duration") = 20.0,
      py::arg("workers") = 0u);

  m.def(
      "gp_evaluate",
      [](const cpg::OscillatorParams& p) {
        const auto e = gp::evaluate(gp::encode(p), {}, {}, p);
        return py::dict("fitness"_a = e.fitness, "feasible"_a = e.feasible, "v_g"_a = e.v_g,
                        "theta_g"_a = e.theta_g, "d_g"_a = e.d_g);
      },
      py::arg("params") = cpg::OscillatorParams{});

  py::class_<rl::Policy>(m, "Policy")
      .def_property_readonly("variant", [](const rl::Policy& p) { return rl::to_string(p.variant); })
      .def_readonly("c", &rl::Policy::c)
      .def_readonly("options", &rl::Policy::options)
      .def_property_readonly("level", [](const rl::Policy& p) { return p.meta.level; })
      .def_property_readonly("episodes", [](const rl::Policy& p) { return p.meta.episodes; })
      .def("save", &rl::Policy::save);

  m.def("load_policy", &rl::Policy::load, py::arg("path"));

  m.def(
      "train",
      [](const std::map<std::string, py::object>& options) {
        const auto cfg = rl::train_config_from(kv_from(options));
        py::gil_scoped_release release;
        auto result = rl::train(cfg);
        return std::make_tuple(std::move(result.policy), result.level_reached, result.success_rate);
      },
      py::arg("options") = std::map<std::string, py::object>{},
      "Trains with key = value options; returns (policy, level reached, window success rate).");

  m.def(
      "rollout",
      [](const rl::Policy& policy, const std::string& script, double distance, double angle, double radius,
         std::uint64_t seed) {
        rl::RolloutOptions opts;
        opts.seed = seed;
        const auto log = rl::rollout(policy, {rl::script_from(script), distance, angle, radius}, opts);
        std::vector<double> t, x, y, v_g;
        std::vector<std::array<double, 4>> psi;
        for (const auto& r : log.rows) {
          t.push_back(r.t);
          x.push_back(r.head.x());
          y.push_back(r.head.y());
          v_g.push_back(r.v_g);
          psi.push_back(r.psi);
        }
        py::list outcomes;
        for (auto o : log.outcomes) outcomes.append(rl::to_string(o));
        return py::dict("t"_a = py::array(py::cast(t)), "head_x"_a = py::array(py::cast(x)),
                        "head_y"_a = py::array(py::cast(y)), "v_g"_a = py::array(py::cast(v_g)),
                        "psi"_a = column_matrix(psi), "outcomes"_a = outcomes, "success"_a = log.success());
      },
      py::arg("policy"), py::arg("script") = "single", py::arg("distance") = 1.5, py::arg("angle") = 0.0,
      py::arg("radius") = 0.3, py::arg("seed") = 0);
}
