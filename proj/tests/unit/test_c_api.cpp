#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <string>

#include "signorini/c_api.h"

namespace fs = std::filesystem;

namespace {
std::string take(char* p) {
  std::string s = p ? p : "";
  sg_free_string(p);
  return s;
}
}  // namespace

TEST_CASE("c api: argument errors set the last error") {
  CHECK(sg_set_threads(0) == SG_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(sg_last_error()) > 0);
  CHECK(sg_set_threads(1) == SG_OK);
  CHECK(std::strlen(sg_last_error()) == 0);
  CHECK(sg_config_preset(nullptr, nullptr) == SG_ERR_INVALID_ARGUMENT);
  char* out = nullptr;
  CHECK(sg_config_preset("missing", &out) == SG_ERR_INVALID_ARGUMENT);
  CHECK(sg_config_validate("{\"grid\": {\"bogus\": 1}}", &out) == SG_ERR_CONFIG);
  CHECK(std::string(sg_last_error()).find("unknown key") != std::string::npos);
  CHECK(sg_config_validate("{", &out) == SG_ERR_CONFIG);
  CHECK(sg_load_config_file("/nonexistent/config.json", &out) == SG_ERR_IO);
}

TEST_CASE("c api: presets and version") {
  char* names = nullptr;
  REQUIRE(sg_preset_names(&names) == SG_OK);
  std::string n = take(names);
  CHECK(n.find("constant_w32\n") != std::string::npos);
  CHECK(std::strlen(sg_version()) > 0);
}

TEST_CASE("c api: run lifecycle and compare") {
  fs::path dir = fs::temp_directory_path() / "signorini_capi";
  fs::remove_all(dir);
  char* cfg = nullptr;
  REQUIRE(sg_config_preset("trivial_zero", &cfg) == SG_OK);
  std::string config = take(cfg);
  sg_run* run = nullptr;
  REQUIRE(sg_run_create(config.c_str(), dir.c_str(), nullptr, &run) == SG_OK);
  char* sum = nullptr;
  CHECK(sg_run_summary(run, &sum) == SG_ERR_PRECONDITION);
  REQUIRE(sg_run_execute(run) == SG_OK);
  REQUIRE(sg_run_summary(run, &sum) == SG_OK);
  CHECK(take(sum).find("\"no_free_boundary\": true") != std::string::npos);
  sg_run_destroy(run);

  std::string s = (dir / "summary.json").string();
  char* diff = nullptr;
  int violations = -1;
  REQUIRE(sg_compare(s.c_str(), s.c_str(), nullptr, &diff, &violations) == SG_OK);
  CHECK(violations == 0);
  CHECK(take(diff).find("\"entries\": []") != std::string::npos);
  CHECK(sg_compare(s.c_str(), "/nonexistent.json", nullptr, &diff, &violations) == SG_ERR_IO);
}
