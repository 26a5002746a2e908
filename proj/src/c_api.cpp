#include "signorini/c_api.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "signorini/error.hpp"
#include "signorini/parallel.hpp"
#include "signorini/pipeline.hpp"

using namespace signorini;

struct sg_run {
  Json config;
  RunOptions options;
  Json summary;
  bool executed = false;
};

namespace {

thread_local std::string g_last_error;

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p) std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

template <class F>
sg_status guarded(F&& fn) {
  try {
    fn();
    g_last_error.clear();
    return SG_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<sg_status>(e.code());
  } catch (const Json::exception& e) {
    g_last_error = e.what();
    return SG_ERR_CONFIG;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SG_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SG_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  require(p != nullptr, ErrorCode::InvalidArgument, std::string(what) + " is null");
}

}  // namespace

extern "C" {

const char* sg_last_error(void) { return g_last_error.c_str(); }

const char* sg_version(void) { return "1.0.0"; }

void sg_free_string(char* s) { std::free(s); }

sg_status sg_set_threads(int n) {
  return guarded([&] {
    require(n >= 1, ErrorCode::InvalidArgument, "thread count must be >= 1");
    set_thread_count(n);
  });
}

sg_status sg_preset_names(char** out) {
  return guarded([&] {
    need(out, "out");
    std::string s;
    for (const auto& n : preset_names()) s += n + "\n";
    *out = dup(s);
  });
}

sg_status sg_config_preset(const char* name, char** out_json) {
  return guarded([&] {
    need(name, "name");
    need(out_json, "out_json");
    *out_json = dup(dump_json(preset_config(name)));
  });
}

sg_status sg_load_config_file(const char* path, char** out_json) {
  return guarded([&] {
    need(path, "path");
    need(out_json, "out_json");
    *out_json = dup(dump_json(load_config(path)));
  });
}

sg_status sg_config_validate(const char* json, char** out_json) {
  return guarded([&] {
    need(json, "json");
    std::string text = json;
    Json c = normalize_config(parse_config_text(text), text);
    if (out_json) *out_json = dup(dump_json(c));
  });
}

sg_status sg_run_create(const char* config_json, const char* out_dir, const char* cache_dir, sg_run** out) {
  return guarded([&] {
    need(config_json, "config_json");
    need(out_dir, "out_dir");
    need(out, "out");
    std::string text = config_json;
    auto* r = new sg_run;
    try {
      r->config = normalize_config(parse_config_text(text), text);
    } catch (...) {
      delete r;
      throw;
    }
    r->options.out_dir = out_dir;
    if (cache_dir) r->options.cache_dir = cache_dir;
    *out = r;
  });
}

sg_status sg_run_execute(sg_run* run) {
  return guarded([&] {
    need(run, "run");
    run->summary = run_experiment(run->config, run->options);
    run->executed = true;
  });
}

sg_status sg_run_summary(const sg_run* run, char** out_json) {
  return guarded([&] {
    need(run, "run");
    need(out_json, "out_json");
    require(run->executed, ErrorCode::Precondition, "run has not been executed");
    *out_json = dup(dump_json(run->summary));
  });
}

void sg_run_destroy(sg_run* run) { delete run; }

sg_status sg_compare(const char* summary_a_path, const char* summary_b_path, const char* tolerances_json,
                     char** out_json, int* violations) {
  return guarded([&] {
    need(summary_a_path, "summary_a_path");
    need(summary_b_path, "summary_b_path");
    Json a = parse_config_text(read_text_file(summary_a_path));
    Json b = parse_config_text(read_text_file(summary_b_path));
    Json tol = tolerances_json ? parse_config_text(tolerances_json) : Json::object();
    CompareResult r = compare_summaries(a, b, tol);
    if (out_json) *out_json = dup(dump_json(r.to_json()));
    if (violations) *violations = static_cast<int>(r.violations);
  });
}

}  // extern "C"
