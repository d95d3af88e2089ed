#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <sstream>

#include "cli.hpp"
#include "pyramid/analysis.hpp"
#include "pyramid/config.hpp"
#include "pyramid/errors.hpp"
#include "pyramid/pyramid_oram.hpp"

namespace py = pybind11;
using namespace pyramid;

namespace {

Payload to_payload(const py::bytes& b) {
  const std::string s = b;
  if (s.size() > kPayloadBytes) {
    throw InvalidParameter("payload longer than " + std::to_string(kPayloadBytes) + " bytes");
  }
  Payload p{};
  std::copy(s.begin(), s.end(), p.begin());
  return p;
}

py::object from_payload(const std::optional<Payload>& p) {
  if (!p) return py::none();
  return py::bytes(reinterpret_cast<const char*>(p->data()), p->size());
}

py::dict bound_dict(const analysis::BoundValue& b) {
  py::dict d;
  d["exact"] = b.exact ? py::object(py::str(analysis::to_string(*b.exact))) : py::none();
  d["float"] = b.floating;
  d["value"] = b.value;
  d["note"] = b.note;
  return d;
}

py::dict record_dict(const AccessRecord& r) {
  py::dict d;
  d["op_index"] = r.op_index;
  d["found"] = r.found;
  d["rebuilt_level"] = r.rebuilt_level;
  d["online_buckets"] = r.online_buckets;
  d["total_buckets"] = r.total_buckets;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Pyramid ORAM bindings";
  m.attr("PAYLOAD_BYTES") = kPayloadBytes;

  py::register_exception<InvalidParameter>(m, "InvalidParameter", PyExc_ValueError);
  py::register_exception<InsufficientData>(m, "InsufficientData", PyExc_ValueError);
  py::register_exception<CapacityExceeded>(m, "CapacityExceeded", PyExc_RuntimeError);
  py::register_exception<BuildFailure>(m, "BuildFailure", PyExc_RuntimeError);

  py::class_<PyramidConfig>(m, "PyramidConfig")
      .def(py::init([](std::uint64_t capacity, std::uint32_t first_level_size, std::uint32_t c,
                       std::uint32_t k_override, std::uint64_t seed, const std::string& policy,
                       std::uint32_t max_retries) {
             PyramidConfig cfg;
             cfg.capacity = capacity;
             cfg.first_level_size = first_level_size;
             cfg.c = c;
             cfg.k_override = k_override;
             cfg.seed = seed;
             cfg.policy = failure_policy_from_string(policy);
             cfg.max_retries = max_retries;
             cfg.validate();
             return cfg;
           }),
           py::arg("capacity") = 1u << 14, py::arg("first_level_size") = 1024,
           py::arg("c") = 4, py::arg("k_override") = 0, py::arg("seed") = 0,
           py::arg("policy") = "strict-abort", py::arg("max_retries") = 3)
      .def_readonly("capacity", &PyramidConfig::capacity)
      .def_readonly("first_level_size", &PyramidConfig::first_level_size)
      .def_readonly("c", &PyramidConfig::c)
      .def_readonly("k_override", &PyramidConfig::k_override)
      .def_readonly("seed", &PyramidConfig::seed)
      .def_property_readonly("level_count", &PyramidConfig::level_count)
      .def("levels",
           [](const PyramidConfig& cfg) {
             py::list out;
             for (const auto& lp : cfg.levels()) out.append(py::make_tuple(lp.n, lp.k, lp.c));
             return out;
           })
      .def("to_json", [](const PyramidConfig& cfg) { return config_to_json(cfg).dump(); })
      .def_static("from_json",
                  [](const std::string& s) {
                    return config_from_json(nlohmann::json::parse(s));
                  })
      .def("__eq__", [](const PyramidConfig& a, const PyramidConfig& b) { return a == b; });

  py::class_<PyramidOram>(m, "PyramidOram")
      .def(py::init([](const PyramidConfig& cfg) { return PyramidOram(cfg); }),
           py::arg("config"))
      .def(
          "read",
          [](PyramidOram& o, std::uint32_t key) { return from_payload(o.read(key)); },
          py::arg("key"), "Payload stored under key, or None.")
      .def(
          "write",
          [](PyramidOram& o, std::uint32_t key, const py::bytes& value) {
            return from_payload(o.write(key, to_payload(value)));
          },
          py::arg("key"), py::arg("value"),
          "Stores value (zero-padded) and returns the previous payload or None.")
      .def_property_readonly("counter", &PyramidOram::counter)
      .def_property_readonly("real_count", &PyramidOram::real_count)
      .def_property_readonly("level_count", &PyramidOram::level_count)
      .def_property_readonly("last_record",
                             [](const PyramidOram& o) { return record_dict(o.last_record()); })
      .def("validate", &PyramidOram::validate);

  m.def("rebuild_target", &rebuild_target, py::arg("config"), py::arg("t"));
  m.def("online_cost", &online_cost, py::arg("config"), py::arg("t"));
  m.def("total_cost", &total_cost, py::arg("config"), py::arg("t"));
  m.def("amortized_cost", &amortized_cost, py::arg("config"));

  m.def(
      "bucket_overflow_prob_bound",
      [](std::uint64_t mm, std::uint64_t n, std::uint64_t c) {
        return bound_dict(analysis::bucket_overflow_prob_bound(mm, n, c));
      },
      py::arg("m"), py::arg("n"), py::arg("c"));
  m.def(
      "expected_spill_bound",
      [](std::uint64_t mm, std::uint64_t n, std::uint64_t c) {
        return bound_dict(analysis::expected_spill_bound(mm, n, c));
      },
      py::arg("m"), py::arg("n"), py::arg("c"));
  m.def("zigzag_failure_bound", &analysis::zigzag_failure_bound, py::arg("m"), py::arg("n"),
        py::arg("c"), py::arg("k"));
  m.def(
      "mc_throw_spill",
      [](std::uint64_t mm, std::uint64_t n, std::uint64_t c, std::uint64_t trials,
         std::uint64_t seed, unsigned workers) {
        const auto s = [&] {
          py::gil_scoped_release release;
          return analysis::mc_throw_spill(mm, n, c, trials, seed, workers);
        }();
        return analysis::to_json(s).dump();
      },
      py::arg("m"), py::arg("n"), py::arg("c"), py::arg("trials"), py::arg("seed") = 0,
      py::arg("workers") = 1, "SpillStats as a JSON string.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in process: (exit code, stdout, stderr).");
}
