#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mdbell/closed_form.hpp"
#include "mdbell/errors.hpp"
#include "mdbell/oracle.hpp"
#include "mdbell/serialization.hpp"
#include "mdbell/simulator.hpp"

namespace py = pybind11;
using namespace mdbell;

namespace {

py::object to_python(const Json& j) {
  switch (j.type()) {
    case Json::value_t::null:
      return py::none();
    case Json::value_t::boolean:
      return py::bool_(j.get<bool>());
    case Json::value_t::number_integer:
      return py::int_(j.get<std::int64_t>());
    case Json::value_t::number_unsigned:
      return py::int_(j.get<std::uint64_t>());
    case Json::value_t::number_float:
      return py::float_(j.get<double>());
    case Json::value_t::string:
      return py::str(j.get<std::string>());
    case Json::value_t::array: {
      py::list out;
      for (const auto& item : j) out.append(to_python(item));
      return out;
    }
    case Json::value_t::object: {
      py::dict out;
      for (const auto& [key, value] : j.items()) out[py::str(key)] = to_python(value);
      return out;
    }
    default:
      throw SchemaError("unsupported JSON value");
  }
}

Json from_python(const py::handle& obj) {
  if (obj.is_none()) return nullptr;
  if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
  if (py::isinstance<py::int_>(obj)) return obj.cast<std::int64_t>();
  if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
  if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
  if (py::isinstance<py::dict>(obj)) {
    Json out = Json::object();
    for (const auto& [key, value] : obj.cast<py::dict>()) out[py::str(key).cast<std::string>()] = from_python(value);
    return out;
  }
  if (py::isinstance<py::sequence>(obj)) {
    Json out = Json::array();
    for (const auto& item : obj.cast<py::sequence>()) out.push_back(from_python(item));
    return out;
  }
  throw SchemaError("cannot convert Python object of type " + std::string(py::str(py::type::handle_of(obj))));
}

RandomnessBounds make_bounds(double upper, double lower) { return RandomnessBounds::make(upper, lower); }

Functional parse_functional(const std::string& name) {
  if (name == "ch") return Functional::CH;
  if (name == "chsh") return Functional::CHSH;
  throw ValidationError("unknown functional '" + name + "' (expected ch or chsh)");
}

ThresholdKind parse_threshold(const std::string& name) {
  if (name == "P") return ThresholdKind::PAtSmallQ;
  if (name == "Q") return ThresholdKind::QAtLargeP;
  if (name == "delta") return ThresholdKind::Delta;
  throw ValidationError("unknown threshold '" + name + "' (expected P, Q or delta)");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bell-test bounds for hidden-variable models with limited measurement independence.";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ComputationError>(m, "ComputationError", PyExc_RuntimeError);

  m.attr("QUANTUM_CH_BOUND") = kQuantumChBound;

  m.def(
      "bound",
      [](const std::string& condition, double P, double Q, const std::string& functional) {
        return to_python(to_json(bound(parse_functional(functional), ConditionFlags::parse(condition), make_bounds(P, Q))));
      },
      py::arg("condition"), py::arg("P"), py::arg("Q"), py::arg("functional") = "ch");

  m.def(
      "bound_delta", [](const std::string& condition, double delta) {
        return ch_bound_delta(ConditionFlags::parse(condition), delta);
      },
      py::arg("condition"), py::arg("delta"));

  m.def(
      "critical_threshold",
      [](const std::string& condition, const std::string& which, double target) {
        return critical_threshold(ConditionFlags::parse(condition), parse_threshold(which), target);
      },
      py::arg("condition"), py::arg("which"), py::arg("target") = kQuantumChBound,
      "Critical P (Q = 0), Q (large P) or delta at which the bound reaches `target`.");

  m.def(
      "build_attack",
      [](const std::string& condition, double P, double Q, bool numerical, std::uint64_t seed) {
        const AttackOptions options{numerical ? AttackMethod::Numerical : AttackMethod::Analytic, seed};
        return to_python(to_json(build_attack(ConditionFlags::parse(condition), make_bounds(P, Q), options)));
      },
      py::arg("condition"), py::arg("P"), py::arg("Q"), py::arg("numerical") = false, py::arg("seed") = 1);

  m.def(
      "ensemble_value",
      [](const py::dict& ensemble, const std::string& functional) {
        return ensemble_bell_value(ensemble_from_json(from_python(ensemble)), parse_functional(functional));
      },
      py::arg("ensemble"), py::arg("functional") = "ch");

  m.def(
      "validate",
      [](const py::dict& ensemble, double P, double Q) {
        return to_python(to_json(validate_ensemble(ensemble_from_json(from_python(ensemble)), make_bounds(P, Q))));
      },
      py::arg("ensemble"), py::arg("P"), py::arg("Q"));

  m.def(
      "oracle_general",
      [](double P, double Q, const std::string& functional, bool all_strategies) {
        GeneralOracleOptions options;
        options.all_strategies = all_strategies;
        return to_python(to_json(optimize_general(parse_functional(functional), make_bounds(P, Q), options)));
      },
      py::arg("P"), py::arg("Q"), py::arg("functional") = "ch", py::arg("all_strategies") = false);

  m.def(
      "oracle_factorizable",
      [](double P, double Q, const std::string& functional, int grid_n) {
        return to_python(to_json(optimize_factorizable(parse_functional(functional), make_bounds(P, Q), grid_n)));
      },
      py::arg("P"), py::arg("Q"), py::arg("functional") = "ch", py::arg("grid_n") = 128);

  m.def(
      "simulate",
      [](const py::dict& ensemble, std::uint64_t n_trials, std::uint64_t seed) {
        SimConfig cfg{n_trials, seed, ensemble_from_json(from_python(ensemble))};
        SimReport report;
        {
          py::gil_scoped_release release;
          report = simulate(cfg);
        }
        return to_python(to_json(report));
      },
      py::arg("ensemble"), py::arg("n_trials"), py::arg("seed") = 0);
}
