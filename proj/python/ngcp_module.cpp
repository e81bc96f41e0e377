#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ngcp/engine.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace ngcp;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ScenarioError("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

py::dict result_dict(const RunResult& r) {
  py::dict d;
  d["trace"] = r.trace;
  d["metrics"] = r.metrics.values;
  d["digests"] = r.digests;
  return d;
}

py::dict run_scenario(const std::string& path, std::optional<std::uint64_t> seed, std::optional<std::string> fabric) {
  RunOptions opts;
  opts.seed = seed;
  if (fabric) {
    FabricModelKind k;
    if (!parse_fabric_kind(*fabric, k)) throw py::value_error("unknown fabric model " + *fabric);
    opts.fabric = k;
  }
  RunResult r;
  {
    py::gil_scoped_release release;
    r = run(load_inputs(path), opts);
  }
  return result_dict(r);
}

py::dict compose(const std::string& catalog_path) {
  auto text = slurp(catalog_path);
  auto cat = load_catalog(text, catalog_path);
  auto bbs = group_into_bbs(cat, derive_separation_constraints(cat));
  auto report = evaluate_grouping(bbs, cat.procedures());
  py::dict blocks;
  for (const auto& bb : bbs) blocks[py::str(bb.name)] = std::vector<std::string>(bb.sf_set.begin(), bb.sf_set.end());
  py::dict d;
  d["blocks"] = blocks;
  d["interfaces"] = report.total_inter_bb_interfaces;
  d["cross_bb"] = report.cross_bb;
  d["decision"] = std::string(to_string(refine(bbs, report).action));
  return d;
}

std::vector<std::string> validate(const std::string& blueprint_path, const std::string& catalog_path) {
  fs::path bp_path(blueprint_path);
  DocResolver resolver = [&](const std::string& from, const std::string& ref) {
    auto key = resolve_key(from, ref);
    return std::make_pair(key, slurp(bp_path.parent_path() / key));
  };
  auto bp = load_blueprint(slurp(bp_path), bp_path.filename().string(), resolver);
  return validate_blueprint(bp, grouping_for(slurp(catalog_path), catalog_path)).violations;
}

py::list compare(const std::string& path, std::optional<std::uint64_t> seed) {
  FabricComparison cmp;
  {
    py::gil_scoped_release release;
    cmp = compare_fabrics(load_inputs(path), seed);
  }
  py::list rows;
  for (const auto& r : cmp.rows) {
    py::dict d;
    d["model"] = std::string(to_string(r.model));
    d["hops"] = r.hops;
    d["messages"] = r.messages;
    d["digest"] = r.digest;
    rows.append(d);
  }
  return rows;
}

}  // namespace

PYBIND11_MODULE(ngcp, m) {
  m.doc() = "Slice-based control plane simulator";
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  m.def("run", &run_scenario, py::arg("scenario"), py::arg("seed") = py::none(), py::arg("fabric") = py::none(),
        "Run a scenario file; returns trace, metrics and digests.");
  m.def("compose", &compose, py::arg("catalog"), "Group a catalog file into building blocks.");
  m.def("validate", &validate, py::arg("blueprint"), py::arg("catalog"),
        "Violations of a blueprint file against a catalog file (empty when valid).");
  m.def("compare_fabrics", &compare, py::arg("scenario"), py::arg("seed") = py::none());
  m.def(
      "trace_check", [](const std::string& trace) { return check_trace(trace).violations; }, py::arg("trace"),
      "Audit violations of a trace text (empty when consistent).");
  m.def(
      "replay", [](const std::string& trace) { return result_dict(replay(trace)); }, py::arg("trace"));
}
