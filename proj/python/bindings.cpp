#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "boomforce/compliance.hpp"
#include "boomforce/config.hpp"
#include "boomforce/control.hpp"
#include "boomforce/errors.hpp"
#include "boomforce/harness.hpp"
#include "boomforce/metrics.hpp"
#include "boomforce/model.hpp"
#include "boomforce/serialize.hpp"

namespace py = pybind11;
using namespace boomforce;

namespace {

JointState joints(double theta1, double d2) { return {theta1, d2}; }

py::dict trace_columns(const Trace& trace) {
  std::vector<double> t, theta1, d2, x, y, f_n, f_t, v_n, v_t, k_eq, k_f, b;
  std::vector<std::string> phase;
  for (const TraceSample& s : trace) {
    t.push_back(s.t);
    phase.emplace_back(to_token(s.phase));
    theta1.push_back(s.theta1);
    d2.push_back(s.d2);
    x.push_back(s.x);
    y.push_back(s.y);
    f_n.push_back(s.f_n);
    f_t.push_back(s.f_t);
    v_n.push_back(s.v_n_cmd);
    v_t.push_back(s.v_t_cmd);
    k_eq.push_back(s.k_eq);
    k_f.push_back(s.k_f);
    b.push_back(s.b);
  }
  py::dict d;
  d["t"] = t;
  d["phase"] = phase;
  d["theta1"] = theta1;
  d["d2"] = d2;
  d["x"] = x;
  d["y"] = y;
  d["f_n"] = f_n;
  d["f_t"] = f_t;
  d["v_n_cmd"] = v_n;
  d["v_t_cmd"] = v_t;
  d["k_eq"] = k_eq;
  d["k_f"] = k_f;
  d["b"] = b;
  return d;
}

}  // namespace

PYBIND11_MODULE(_boomforce, m) {
  m.doc() = "Gain-scheduled admittance force control of a long-reach boom";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result([&] {
    return py::object(py::exception<Error>(m, "BoomforceError", PyExc_RuntimeError));
  });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::object& type = error_type.get_stored();
      py::object exc = type(std::string(to_string(e.code())) + ": " + e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(type.ptr(), exc.ptr());
    }
  });

  m.def(
      "forward_kinematics",
      [](double theta1, double d2) {
        const EndpointState p = forward_kinematics(joints(theta1, d2));
        return py::make_tuple(p.x, p.y);
      },
      py::arg("theta1"), py::arg("d2"), "Tip position (x, y).");
  m.def(
      "jacobian", [](double theta1, double d2) { return jacobian(joints(theta1, d2)); },
      py::arg("theta1"), py::arg("d2"));
  m.def("dls_inverse", &dls_inverse, py::arg("j"), py::arg("lam") = 0.01);
  m.def(
      "resolved_rate",
      [](double theta1, double d2, double vx, double vy) {
        const RateCommand cmd = resolved_rate(joints(theta1, d2), {vx, vy}, RobotParams{});
        return py::make_tuple(cmd.qdot.theta1_dot, cmd.qdot.d2_dot, cmd.saturated);
      },
      py::arg("theta1"), py::arg("d2"), py::arg("vx"), py::arg("vy"),
      "Joint rates (theta1_dot, d2_dot, saturated) with default limits.");

  m.def(
      "task_normal_stiffness",
      [](double k_theta, double theta1, double d2, double sin_eps) {
        return task_normal_stiffness({k_theta, kRigid}, joints(theta1, d2), sin_eps);
      },
      py::arg("k_theta"), py::arg("theta1"), py::arg("d2"), py::arg("sin_eps") = kDefaultSinEps);
  m.def("series_stiffness", &series_stiffness, py::arg("k_a"), py::arg("k_b"));
  m.def(
      "equivalent_stiffness",
      [](double k_theta, double k_ee, double theta1, double d2) {
        return equivalent_stiffness({k_theta, k_ee}, joints(theta1, d2));
      },
      py::arg("k_theta"), py::arg("k_ee"), py::arg("theta1"), py::arg("d2"));

  m.def(
      "schedule_gains",
      [](double omega_n, double eta, double mass, double k_eq) {
        const AdmittanceGains g = schedule_gains({omega_n, eta, mass}, k_eq);
        return py::make_tuple(g.k_f, g.b);
      },
      py::arg("omega_n"), py::arg("eta"), py::arg("mass"), py::arg("k_eq"),
      "Returns (K_f, B).");
  m.def(
      "admittance_step",
      [](double k_f, double b, double mass, double v_n, double f_n, double f_des, double dt) {
        return admittance_step({k_f, b, mass}, v_n, f_n, f_des, dt);
      },
      py::arg("k_f"), py::arg("b"), py::arg("mass"), py::arg("v_n"), py::arg("f_n"),
      py::arg("f_des"), py::arg("dt"));
  m.def(
      "stability_bound",
      [](double omega_n, double eta, double mass, double k_eq) {
        return stability_bound({omega_n, eta, mass}, k_eq).max_stable_dt;
      },
      py::arg("omega_n"), py::arg("eta"), py::arg("mass"), py::arg("k_eq"));
  m.def(
      "fit_second_order",
      [](const std::vector<double>& t, const std::vector<double>& e) {
        if (t.size() != e.size()) throw Error(ErrorCode::kInvalidArgument, "t and e differ in length");
        std::vector<TimedValue> signal;
        for (std::size_t i = 0; i < t.size(); ++i) signal.push_back({t[i], e[i]});
        const SecondOrderFit fit = fit_second_order(signal);
        py::dict d;
        d["omega_n"] = fit.omega_n;
        d["eta"] = fit.eta;
        d["r_squared"] = fit.r_squared;
        d["good"] = fit.good;
        d["method"] = fit.method;
        return d;
      },
      py::arg("t"), py::arg("e"));

  m.def("default_config_json", [] { return to_json(ScenarioConfig{}).dump(); });
  m.def(
      "run_scenario_json",
      [](const std::string& config_json, const std::vector<std::string>& overrides) {
        const auto doc = parse_json_text(config_json, "<config>");
        const ScenarioConfig config = config_with_overrides(doc, overrides);
        ScenarioResult result;
        {
          py::gil_scoped_release release;
          result = run_scenario(config);
        }
        return py::make_tuple(trace_columns(result.trace),
                              summary_to_json(result.summary).dump());
      },
      py::arg("config_json"), py::arg("overrides") = std::vector<std::string>{},
      "Runs a scenario; returns (trace columns, summary JSON text).");
}
