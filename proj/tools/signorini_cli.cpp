#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "signorini/c_api.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

int exit_for(sg_status s) {
  return (s == SG_ERR_CONFIG || s == SG_ERR_INVALID_ARGUMENT || s == SG_ERR_IO) ? kExitUsage : kExitFailure;
}

int report(sg_status s, const std::string& what) {
  std::cerr << "error: " << what << ": " << sg_last_error() << "\n";
  return exit_for(s);
}

// Takes ownership of a C API string.
std::string take(char* p) {
  std::string s = p ? p : "";
  sg_free_string(p);
  return s;
}

bool write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return true;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    std::cerr << "error: cannot write " << path << "\n";
    return false;
  }
  os << text;
  return true;
}

int resolve_threads(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("SIGNORINI_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
    std::cerr << "warning: ignoring SIGNORINI_THREADS=" << env << "\n";
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thin obstacle problem experiments: solve, analyze and compare."};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sg_version()));

  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: $SIGNORINI_THREADS or 1)")->check(CLI::PositiveNumber);

  auto* run = app.add_subcommand("run", "Run an experiment and write its artifacts");
  std::string config_path, preset, out_dir, cache_dir;
  auto* cfg_opt = run->add_option("--config", config_path, "Config JSON file")->check(CLI::ExistingFile);
  run->add_option("--preset", preset, "Bundled config name (see gen-config --list)")->excludes(cfg_opt);
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--cache", cache_dir, "Solve cache directory (default: <out>/cache)");
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* cmp = app.add_subcommand("compare", "Compare two summary.json files field by field");
  std::string sum_a, sum_b, tol_overrides, cmp_out;
  cmp->add_option("A", sum_a, "First summary.json")->required()->check(CLI::ExistingFile);
  cmp->add_option("B", sum_b, "Second summary.json")->required()->check(CLI::ExistingFile);
  cmp->add_option("--tol-overrides", tol_overrides,
                  "Tolerances as inline JSON or a JSON file: {\"default\": {\"abs\": a, \"rel\": r}, \"/pointer\": {...}}");
  cmp->add_option("--out", cmp_out, "Write the diff report here (default: stdout)");

  auto* gen = app.add_subcommand("gen-config", "Print a bundled config");
  std::string gen_name, gen_out;
  bool gen_list = false;
  gen->add_option("name", gen_name, "Preset name");
  gen->add_flag("--list", gen_list, "List preset names");
  gen->add_option("--out", gen_out, "Write the config here (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  sg_status st = sg_set_threads(resolve_threads(threads));
  if (st != SG_OK) return report(st, "threads");

  if (*gen) {
    if (gen_list || gen_name.empty()) {
      char* names = nullptr;
      if ((st = sg_preset_names(&names)) != SG_OK) return report(st, "gen-config");
      std::cout << take(names);
      return gen_list ? kExitOk : kExitUsage;
    }
    char* js = nullptr;
    if ((st = sg_config_preset(gen_name.c_str(), &js)) != SG_OK) return report(st, "gen-config");
    return write_or_print(gen_out, take(js)) ? kExitOk : kExitUsage;
  }

  if (*run) {
    std::string cfg;
    char* js = nullptr;
    if (!config_path.empty())
      st = sg_load_config_file(config_path.c_str(), &js);
    else if (!preset.empty())
      st = sg_config_preset(preset.c_str(), &js);
    else {
      std::cerr << "error: run needs --config or --preset\n";
      return kExitUsage;
    }
    if (st != SG_OK) return report(st, "config");
    cfg = take(js);
    sg_run* r = nullptr;
    if ((st = sg_run_create(cfg.c_str(), out_dir.c_str(), cache_dir.empty() ? nullptr : cache_dir.c_str(), &r)) != SG_OK)
      return report(st, "run");
    st = sg_run_execute(r);
    if (st != SG_OK) {
      sg_run_destroy(r);
      return report(st, "run");
    }
    char* sj = nullptr;
    st = sg_run_summary(r, &sj);
    sg_run_destroy(r);
    if (st != SG_OK) return report(st, "run");
    nlohmann::json summary = nlohmann::json::parse(take(sj));
    std::size_t failed = 0;
    for (auto it = summary["stages"].begin(); it != summary["stages"].end(); ++it) {
      std::cout << it.key() << ": " << it->get<std::string>() << "\n";
      if (*it == "failed") ++failed;
    }
    for (const auto& e : summary["errors"]) std::cerr << "stage " << e["stage"].get<std::string>() << ": " << e["message"].get<std::string>() << "\n";
    std::cout << "summary: " << out_dir << "/summary.json\n";
    return failed ? kExitFailure : kExitOk;
  }

  if (*cmp) {
    std::string tol;
    if (!tol_overrides.empty()) {
      if (tol_overrides.front() == '{') {
        tol = tol_overrides;
      } else {
        std::ifstream is(tol_overrides);
        if (!is) {
          std::cerr << "error: cannot read " << tol_overrides << "\n";
          return kExitUsage;
        }
        std::stringstream ss;
        ss << is.rdbuf();
        tol = ss.str();
      }
    }
    char* js = nullptr;
    int violations = 0;
    st = sg_compare(sum_a.c_str(), sum_b.c_str(), tol.empty() ? nullptr : tol.c_str(), &js, &violations);
    if (st != SG_OK) return report(st, "compare");
    if (!write_or_print(cmp_out, take(js))) return kExitUsage;
    std::cerr << violations << " violation(s)\n";
    return violations ? kExitFailure : kExitOk;
  }
  return kExitUsage;
}
