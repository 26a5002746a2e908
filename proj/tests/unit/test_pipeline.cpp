#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "signorini/metric.hpp"
#include "signorini/pipeline.hpp"

using namespace signorini;
namespace fs = std::filesystem;

namespace {
std::string tmpdir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("signorini_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

std::string config_error(const std::string& text) {
  try {
    normalize_config(parse_config_text(text), text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
    return e.what();
  }
  return "";
}

Json metric_only(double amplitude) {
  Json c = {{"grid", {{"dim", 2}, {"inv_h", 32}}},
            {"metric", {{"kind", "perturbed"}, {"amplitude", amplitude}}},
            {"problem", {{"data", {{"kind", "zero"}}}}},
            {"solve", {{"enabled", false}}}};
  for (const char* s : {"vanishing_order", "expansion", "growth", "flatness", "quotient"}) c["analysis"][s]["enabled"] = false;
  return c;
}
}  // namespace

TEST_CASE("defaults fill a minimal config") {
  Json c = normalize_config(Json::object());
  CHECK(c["schema_version"] == 1);
  CHECK(c["grid"]["dim"] == 2);
  CHECK(c["problem"]["mode"] == "boundary_zero");
  CHECK(c["analysis"]["barrier"]["s"] == 0.25);
}

TEST_CASE("every preset validates") {
  for (const auto& n : preset_names()) CHECK_NOTHROW(preset_config(n));
  CHECK_THROWS_AS(preset_config("nope"), Error);
}

TEST_CASE("config diagnostics carry line numbers") {
  std::string unknown = "{\n  \"grid\": {\n    \"dim\": 2,\n    \"inv_hh\": 64\n  }\n}\n";
  std::string m = config_error(unknown);
  CHECK(m.find("line 4") != std::string::npos);
  CHECK(m.find("unknown key") != std::string::npos);

  std::string window = "{\n  \"analysis\": {\n    \"growth\": {\"rmax\": 0.5}\n  }\n}\n";
  m = config_error(window);
  CHECK(m.find("line 3") != std::string::npos);
  CHECK(m.find("1/4") != std::string::npos);

  std::string syntax = "{\n  \"grid\": {\n    \"dim\": 2,,\n  }\n}\n";
  m = config_error(syntax);
  CHECK(m.find("line 3") != std::string::npos);

  m = config_error("{\"grid\": {\"dim\": 5}}");
  CHECK(m.find("/grid/dim") != std::string::npos);
  m = config_error("{\"schema_version\": 2}");
  CHECK(m.find("schema") != std::string::npos);
}

TEST_CASE("json dump: sorted keys, 17 digits, non-finite as strings") {
  Json j = {{"b", 0.1}, {"a", std::numeric_limits<double>::infinity()}, {"c", 3.0}, {"d", std::nan("")}};
  std::string s = dump_json(j);
  CHECK(s.find("\"a\": \"inf\"") < s.find("\"b\""));
  CHECK(s.find("0.10000000000000001") != std::string::npos);
  CHECK(s.find("\"c\": 3.0") != std::string::npos);
  CHECK(s.find("\"d\": \"nan\"") != std::string::npos);
}

TEST_CASE("field files round trip") {
  auto g = std::make_shared<const Grid>(GridSpec{2, 16, true});
  Field f = sample(g, [](const Vec& x) { return std::sin(x[0]) + x[1]; }, FieldMode::BoundaryObstacle);
  std::string p = tmpdir("field") + "/f.bin";
  save_field(f, p);
  Field h = load_field(g, p);
  CHECK(h.v == f.v);
  CHECK(h.mode == FieldMode::BoundaryObstacle);
  auto g2 = std::make_shared<const Grid>(GridSpec{2, 32, true});
  CHECK_THROWS_AS(load_field(g2, p), Error);
}

TEST_CASE("trivial zero run: empty free boundary, no fits, deterministic output") {
  std::string d1 = tmpdir("zero1"), d2 = tmpdir("zero2");
  Json s = run_experiment(preset_config("trivial_zero"), {d1, ""});
  CHECK(s["free_boundary"]["no_free_boundary"] == true);
  CHECK(s["centers"].empty());
  CHECK(s["stages"]["expansion"] == "skipped");
  CHECK(s["errors"].empty());
  run_experiment(preset_config("trivial_zero"), {d2, ""});
  CHECK(read_text_file(d1 + "/summary.json") == read_text_file(d2 + "/summary.json"));
  CHECK(fs::exists(d1 + "/solution.bin"));
  CHECK(fs::exists(d1 + "/slit.csv"));
}

TEST_CASE("cached solve gives the identical summary") {
  std::string d = tmpdir("cache"), cache = tmpdir("cache_store");
  Json c = preset_config("trivial_zero");
  c["problem"]["data"]["kind"] = "w32";
  Json a = run_experiment(c, {d + "/a", cache});
  Json b = run_experiment(c, {d + "/b", cache});
  CHECK(dump_json(a) == dump_json(b));
  CHECK(Json::parse(read_text_file(d + "/b/timing.json"))["cache_hit"] == true);
}

TEST_CASE("stage failures are recorded, not fatal") {
  std::string d = tmpdir("fail");
  Json c = preset_config("trivial_zero");
  c["analysis"]["barrier"]["enabled"] = true;
  c["analysis"]["barrier"]["slit"] = "solution";
  Json s = run_experiment(c, {d, ""});
  CHECK(s["stages"]["barrier"] == "failed");
  REQUIRE(s["errors"].size() == 1);
  CHECK(fs::exists(d + "/error_manifest.json"));
  CHECK(fs::exists(d + "/summary.json"));
}

TEST_CASE("compare: identical summaries give an empty diff") {
  std::string d = tmpdir("cmp");
  Json s = run_experiment(preset_config("trivial_zero"), {d, ""});
  CompareResult r = compare_summaries(s, s);
  CHECK(r.entries.empty());
  CHECK(r.violations == 0);
}

TEST_CASE("compare: amplitudes 0.02 and 0.04 give a cstar ratio of 2") {
  std::string d = tmpdir("amp");
  Json a = run_experiment(metric_only(0.02), {d + "/a", ""});
  Json b = run_experiment(metric_only(0.04), {d + "/b", ""});
  CompareResult r = compare_summaries(a, b);
  bool found = false;
  for (const auto& e : r.entries)
    if (e.path == "/metric/cstar") {
      found = true;
      CHECK(e.ratio == doctest::Approx(2.0).epsilon(1e-6));
      CHECK(e.violated);
    }
  CHECK(found);
  CHECK(r.violations > 0);
  Json loose = {{"default", {{"abs", 1e9}, {"rel", 0.0}}}, {"/config_hash", {{"ignore", true}}}, {"/solve/cache_key", {{"ignore", true}}}};
  CHECK(compare_summaries(a, b, loose).violations == 0);
}

TEST_CASE("compare: tolerance prefixes and schema mismatch") {
  Json a = {{"schema_version", 1}, {"x", {{"y", 1.0}, {"z", 1.0}}}};
  Json b = {{"schema_version", 1}, {"x", {{"y", 1.1}, {"z", 1.1}}}};
  Json tol = {{"default", {{"abs", 0.0}, {"rel", 0.0}}}, {"/x/y", {{"abs", 0.2}}}};
  CompareResult r = compare_summaries(a, b, tol);
  CHECK(r.entries.size() == 2);
  CHECK(r.violations == 1);
  Json c = {{"schema_version", 1}, {"x", {{"y", 1.0}}}};
  CHECK_THROWS_AS(compare_summaries(a, c), Error);
  Json d = {{"x", 1}};
  CHECK_THROWS_AS(compare_summaries(a, d), Error);
}
