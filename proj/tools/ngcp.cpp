// Command-line front end: compose, validate, run, compare-fabrics,
// trace-check and replay. Exit status 0 on success, 1 on a domain error
// or failed check, 2 on a usage error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ngcp/engine.hpp"

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

void write_out(const fs::path& dir, const std::string& name, const std::string& body) {
  fs::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw ScenarioError("cannot write " + (dir / name).string());
  out << body;
}

std::optional<FabricModelKind> fabric_flag(const std::string& s) {
  if (s.empty()) return std::nullopt;
  FabricModelKind m;
  if (!parse_fabric_kind(s, m)) throw CLI::ValidationError("--fabric", "unknown fabric model " + s);
  return m;
}

void emit_run(const RunResult& res, const std::string& out_dir) {
  if (out_dir.empty()) {
    std::cout << res.metrics.str();
    return;
  }
  write_out(out_dir, "trace.log", res.trace);
  write_out(out_dir, "metrics.txt", res.metrics.str());
  std::cout << "digest " << res.digests.at("all") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Slice-based control plane simulator"};
  app.require_subcommand(1);

  std::string catalog, blueprint, scenario, trace, out_dir, fabric;
  std::optional<std::uint64_t> seed;

  auto* compose = app.add_subcommand("compose", "Group a sub-function catalog into building blocks");
  compose->add_option("--catalog", catalog, "Catalog document")->required()->check(CLI::ExistingFile);
  compose->add_option("--out-dir", out_dir, "Write grouping.txt here instead of stdout");

  auto* validate = app.add_subcommand("validate", "Validate a slice blueprint against a catalog");
  validate->add_option("--blueprint", blueprint, "Blueprint document")->required()->check(CLI::ExistingFile);
  validate->add_option("--catalog", catalog, "Catalog document")->required()->check(CLI::ExistingFile);

  auto* run_cmd = app.add_subcommand("run", "Run a scenario");
  run_cmd->add_option("--scenario", scenario, "Scenario document")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", seed, "Override the scenario seed");
  run_cmd->add_option("--fabric", fabric, "Force one fabric model on every slice");
  run_cmd->add_option("--out-dir", out_dir, "Write trace.log and metrics.txt here");

  auto* compare = app.add_subcommand("compare-fabrics", "Run a scenario under every fabric model");
  compare->add_option("--scenario", scenario, "Scenario document")->required()->check(CLI::ExistingFile);
  compare->add_option("--seed", seed, "Override the scenario seed");
  compare->add_option("--out-dir", out_dir, "Write compare.txt here instead of stdout");

  auto* check = app.add_subcommand("trace-check", "Audit a run trace");
  check->add_option("--trace", trace, "Trace file")->required()->check(CLI::ExistingFile);

  auto* replay_cmd = app.add_subcommand("replay", "Re-run from the inputs recorded in a trace");
  replay_cmd->add_option("--trace", trace, "Trace file")->required()->check(CLI::ExistingFile);
  replay_cmd->add_option("--out-dir", out_dir, "Write trace.log and metrics.txt here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*compose) {
      auto cat = load_catalog(slurp(catalog), fs::path(catalog).filename().string());
      auto bbs = group_into_bbs(cat, derive_separation_constraints(cat));
      auto report = evaluate_grouping(bbs, cat.procedures());
      auto doc = format_grouping(bbs, report, refine(bbs, report));
      if (out_dir.empty())
        std::cout << doc;
      else
        write_out(out_dir, "grouping.txt", doc);
    } else if (*validate) {
      fs::path bp_path(blueprint);
      DocResolver resolver = [&](const std::string& from, const std::string& ref) {
        auto key = resolve_key(from, ref);
        return std::make_pair(key, slurp(bp_path.parent_path() / key));
      };
      auto bp = load_blueprint(slurp(bp_path), bp_path.filename().string(), resolver);
      auto verdict = validate_blueprint(bp, grouping_for(slurp(catalog), catalog));
      if (verdict.ok()) {
        std::cout << "ok " << bp.slice_id.str() << "\n";
        return 0;
      }
      for (const auto& v : verdict.violations) std::cout << "violation " << v << "\n";
      return 1;
    } else if (*run_cmd) {
      RunOptions opts;
      opts.seed = seed;
      try {
        opts.fabric = fabric_flag(fabric);
      } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 2;
      }
      emit_run(run(load_inputs(scenario), opts), out_dir);
    } else if (*compare) {
      auto table = compare_fabrics(load_inputs(scenario), seed).str();
      if (out_dir.empty())
        std::cout << table;
      else
        write_out(out_dir, "compare.txt", table);
    } else if (*check) {
      auto audit = check_trace(slurp(trace));
      for (const auto& v : audit.violations) std::cout << "violation " << v << "\n";
      if (!audit.ok()) return 1;
      std::cout << "ok\n";
    } else if (*replay_cmd) {
      emit_run(replay(slurp(trace)), out_dir);
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
