#include "signorini/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "signorini/asymptotics.hpp"
#include "signorini/degenerate.hpp"
#include "signorini/free_boundary.hpp"
#include "signorini/metric.hpp"
#include "signorini/profiles.hpp"
#include "signorini/solver.hpp"
#include "signorini/whitney.hpp"

namespace fs = std::filesystem;

namespace signorini {

namespace {

const char* kDefaults = R"({
  "schema_version": 1,
  "name": "unnamed",
  "seed": 0,
  "grid": {"dim": 2, "inv_h": 128},
  "metric": {"kind": "identity", "amplitude": 0.0, "wavevector": [1.0, 1.0, 1.0], "p": "inf"},
  "problem": {
    "mode": "boundary_zero",
    "obstacle": {"kind": "zero", "coefficient": 0.0},
    "data": {"kind": "w32", "beta": 0.0, "exponent": 1.5, "angular": 1.5, "coefficient": 0.0},
    "rhs": {"kind": "zero", "value": 0.0, "coefficient": 0.0, "exponent": 0.0, "angular": 0.0},
    "q": "inf",
    "reference": "none",
    "expected_contact": "none"
  },
  "solve": {"enabled": true, "tol": 1e-8, "continuation": 0, "omega": 0.0, "max_sweeps": 200000,
            "runtime_budget_s": 120.0},
  "analysis": {
    "contact_tol": 1e-9,
    "graph_window": 0.5,
    "graph_smooth": 4,
    "centers": {"count": 5, "spacing": 0.125, "explicit": []},
    "flatness": {"enabled": true, "rmin_cells": 8.0, "rmax": 0.25},
    "vanishing_order": {"enabled": true, "kappa_lo": 1.4, "kappa_hi": 1.6},
    "expansion": {"enabled": true, "radius": 0.125, "interior": false, "higher_order": true},
    "growth": {"enabled": true, "rmin_cells": 8.0, "rmax": 0.25},
    "holder": {"enabled": false, "radius": 0.5, "near": [0.0, 0.0625], "far": [0.125, 0.25]},
    "blowup": {"enabled": false, "radii": [0.25, 0.125, 0.0625]},
    "quotient": {"enabled": true},
    "split": {"enabled": false, "k_factors": [1.0, 2.0, 4.0], "sigma": 0.0},
    "interior": {"enabled": false},
    "degenerate": {"enabled": false, "manufactured": true,
                   "decay": [{"p": "inf", "sigma": 0.0}, {"p": 8.0, "sigma": 0.25}],
                   "dmin_cells": 4.0, "dmax": 0.25},
    "barrier": {"enabled": false, "kinds": ["h_minus_s", "h_zero"], "s": 0.25, "dmin_cells": 8.0,
                "slit": "flat", "K": 0.0, "alpha": 1.0}
  },
  "output": {"write_fields": true}
})";

// Subtrees whose array elements are free-form (not checked against the defaults).
bool free_form(const std::string& path) {
  return path == "/analysis/centers/explicit" || path == "/analysis/degenerate/decay" ||
         path == "/analysis/barrier/kinds" || path == "/analysis/blowup/radii" || path == "/analysis/split/k_factors" ||
         path == "/metric/wavevector" || path == "/analysis/holder/near" || path == "/analysis/holder/far";
}

struct Issues {
  std::vector<std::pair<std::string, std::string>> list;
  void add(const std::string& path, const std::string& msg) { list.emplace_back(path, msg); }
};

int line_of(const std::string& text, std::size_t pos) {
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(std::min(pos, text.size())), '\n'));
}

// Line of the last key of a JSON pointer, searching the keys in order.
int line_of_path(const std::string& text, const std::string& path) {
  if (text.empty()) return 0;
  std::size_t pos = 0;
  int line = 0;
  std::stringstream ss(path);
  std::string tok;
  while (std::getline(ss, tok, '/')) {
    if (tok.empty() || std::all_of(tok.begin(), tok.end(), ::isdigit)) continue;
    std::size_t p = text.find("\"" + tok + "\"", pos);
    if (p == std::string::npos) break;
    pos = p + tok.size();
    line = line_of(text, p);
  }
  return line;
}

void check_keys(const Json& cfg, const Json& def, const std::string& path, Issues& is) {
  if (!cfg.is_object()) return;
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    std::string p = path + "/" + it.key();
    if (!def.contains(it.key())) {
      is.add(p, "unknown key");
      continue;
    }
    const Json& d = def[it.key()];
    if (free_form(p)) {
      if (!it->is_array()) is.add(p, "expected an array");
      continue;
    }
    if (d.is_object()) {
      if (!it->is_object())
        is.add(p, "expected an object");
      else
        check_keys(*it, d, p, is);
    }
  }
}

double as_number(const Json& j, const std::string& path, Issues& is, bool allow_inf = false) {
  if (j.is_number()) return j.get<double>();
  if (allow_inf && j.is_string() && j.get<std::string>() == "inf") return kInf;
  is.add(path, allow_inf ? "expected a number or \"inf\"" : "expected a number");
  return 0.0;
}

void validate(const Json& c, Issues& is) {
  auto num = [&](const std::string& p, bool inf = false) { return as_number(c.at(Json::json_pointer(p)), p, is, inf); };
  auto str_in = [&](const std::string& p, std::initializer_list<const char*> allowed) {
    const Json& j = c.at(Json::json_pointer(p));
    if (!j.is_string()) {
      is.add(p, "expected a string");
      return;
    }
    std::string v = j.get<std::string>();
    for (const char* a : allowed)
      if (v == a) return;
    std::string msg = "must be one of";
    for (const char* a : allowed) msg += std::string(" ") + a;
    is.add(p, msg);
  };
  auto boolean = [&](const std::string& p) {
    if (!c.at(Json::json_pointer(p)).is_boolean()) is.add(p, "expected true or false");
  };

  if (!c["schema_version"].is_number_integer() || c["schema_version"].get<int>() != kSchemaVersion)
    is.add("/schema_version", "unsupported schema version (expected 1)");
  if (!c["name"].is_string()) is.add("/name", "expected a string");
  if (!c["seed"].is_number_integer() || c["seed"].get<long long>() < 0) is.add("/seed", "expected a non-negative integer");

  const Json& g = c["grid"];
  int dim = 2;
  if (!g["dim"].is_number_integer() || (g["dim"] != 2 && g["dim"] != 3))
    is.add("/grid/dim", "must be 2 or 3");
  else
    dim = g["dim"].get<int>();
  double h = 1.0 / 128;
  if (!g["inv_h"].is_number_integer() || g["inv_h"].get<int>() < 8 || g["inv_h"].get<int>() > 4096)
    is.add("/grid/inv_h", "must be an integer in [8, 4096]");
  else
    h = 1.0 / g["inv_h"].get<int>();

  str_in("/metric/kind", {"identity", "perturbed"});
  if (num("/metric/amplitude") < 0.0) is.add("/metric/amplitude", "must be >= 0");
  const Json& wv = c["metric"]["wavevector"];
  if (!wv.is_array() || wv.size() != 3 || !std::all_of(wv.begin(), wv.end(), [](const Json& x) { return x.is_number(); }))
    is.add("/metric/wavevector", "expected three numbers");
  double p = num("/metric/p", true);
  if (p <= dim) is.add("/metric/p", "must exceed n+1");

  str_in("/problem/mode", {"boundary_obstacle", "boundary_zero", "interior"});
  str_in("/problem/obstacle/kind", {"zero", "quadratic"});
  num("/problem/obstacle/coefficient");
  str_in("/problem/data/kind", {"w32", "zero", "abs_normal", "power", "polynomial2", "w32_plus_linear"});
  for (const char* k : {"beta", "exponent", "angular", "coefficient"}) num(std::string("/problem/data/") + k);
  str_in("/problem/rhs/kind", {"zero", "constant", "power"});
  for (const char* k : {"value", "coefficient", "exponent", "angular"}) num(std::string("/problem/rhs/") + k);
  num("/problem/q", true);
  str_in("/problem/reference", {"none", "data"});
  str_in("/problem/expected_contact", {"none", "data"});

  boolean("/solve/enabled");
  if (num("/solve/tol") <= 0.0) is.add("/solve/tol", "must be > 0");
  if (!c["solve"]["continuation"].is_number_integer() || c["solve"]["continuation"].get<int>() < 0)
    is.add("/solve/continuation", "expected a non-negative integer");
  num("/solve/omega");
  if (!c["solve"]["max_sweeps"].is_number_integer() || c["solve"]["max_sweeps"].get<long>() <= 0)
    is.add("/solve/max_sweeps", "expected a positive integer");
  num("/solve/runtime_budget_s");

  const std::string A = "/analysis";
  if (num(A + "/contact_tol") < 0.0) is.add(A + "/contact_tol", "must be >= 0");
  double win = num(A + "/graph_window");
  if (win <= 0.0 || win > 1.0) is.add(A + "/graph_window", "must lie in (0, 1]");
  if (!c["analysis"]["graph_smooth"].is_number_integer() || c["analysis"]["graph_smooth"].get<int>() < 1)
    is.add(A + "/graph_smooth", "expected a positive integer");
  if (!c["analysis"]["centers"]["count"].is_number_integer() || c["analysis"]["centers"]["count"].get<int>() < 1)
    is.add(A + "/centers/count", "expected a positive integer");
  num(A + "/centers/spacing");
  for (std::size_t k = 0; k < c["analysis"]["centers"]["explicit"].size(); ++k) {
    const Json& e = c["analysis"]["centers"]["explicit"][k];
    if (!e.is_array() || e.size() != 3) is.add(A + "/centers/explicit/" + std::to_string(k), "expected [x, y, z]");
  }
  // Radius windows of enabled analyses must lie within [4h, 1/4].
  auto on = [&](const char* s) {
    const Json& e = c["analysis"][s]["enabled"];
    return !e.is_boolean() || e.get<bool>();
  };
  auto window = [&](const std::string& base) {
    double rmin = num(base + "/rmin_cells") * h, rmax = num(base + "/rmax");
    if (rmin < 4.0 * h - 1e-15) is.add(base + "/rmin_cells", "window must start at >= 4h");
    if (rmax > 0.25 + 1e-15) is.add(base + "/rmax", "window must end at <= 1/4");
    if (rmax <= rmin) is.add(base + "/rmax", "must exceed rmin_cells * h");
  };
  if (on("flatness")) window(A + "/flatness");
  if (on("growth")) window(A + "/growth");
  for (const char* s : {"flatness", "vanishing_order", "expansion", "growth", "holder", "blowup", "quotient", "split",
                        "interior", "degenerate", "barrier"})
    boolean(A + "/" + s + "/enabled");
  double rad = num(A + "/expansion/radius");
  if (on("expansion") && (rad < 4.0 * h || rad > 0.25)) is.add(A + "/expansion/radius", "must lie within [4h, 1/4]");
  boolean(A + "/expansion/interior");
  boolean(A + "/expansion/higher_order");
  for (std::size_t k = 0; k < c["analysis"]["blowup"]["radii"].size(); ++k) {
    const Json& r = c["analysis"]["blowup"]["radii"][k];
    if (!r.is_number() || (on("blowup") && (r.get<double>() < 4.0 * h || r.get<double>() > 0.25)))
      is.add(A + "/blowup/radii/" + std::to_string(k), "radius must lie within [4h, 1/4]");
  }
  for (const char* band : {"near", "far"}) {
    const Json& b = c["analysis"]["holder"][band];
    if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number() || b[0].get<double>() >= b[1].get<double>())
      is.add(A + "/holder/" + band, "expected [lo, hi] with lo < hi");
  }
  for (std::size_t k = 0; k < c["analysis"]["split"]["k_factors"].size(); ++k)
    if (!c["analysis"]["split"]["k_factors"][k].is_number() || c["analysis"]["split"]["k_factors"][k].get<double>() <= 0.0)
      is.add(A + "/split/k_factors/" + std::to_string(k), "expected a positive number");
  for (std::size_t k = 0; k < c["analysis"]["degenerate"]["decay"].size(); ++k) {
    const Json& e = c["analysis"]["degenerate"]["decay"][k];
    std::string p2 = A + "/degenerate/decay/" + std::to_string(k);
    if (!e.is_object() || !e.contains("p") || !e.contains("sigma"))
      is.add(p2, "expected {\"p\": ..., \"sigma\": ...}");
    else {
      as_number(e["p"], p2 + "/p", is, true);
      as_number(e["sigma"], p2 + "/sigma", is);
    }
  }
  for (std::size_t k = 0; k < c["analysis"]["barrier"]["kinds"].size(); ++k) {
    const Json& e = c["analysis"]["barrier"]["kinds"][k];
    if (!e.is_string() || (e != "h_minus_s" && e != "h_zero"))
      is.add(A + "/barrier/kinds/" + std::to_string(k), "must be h_minus_s or h_zero");
  }
  double s = num(A + "/barrier/s");
  if (s <= 0.0 || s >= 0.5) is.add(A + "/barrier/s", "must lie in (0, 1/2)");
  num(A + "/barrier/dmin_cells");
  num(A + "/barrier/K");
  num(A + "/barrier/alpha");
  str_in(A + "/barrier/slit", {"flat", "solution"});
  boolean("/output/write_fields");
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t hsh = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    hsh ^= ch;
    hsh *= 1099511628211ULL;
  }
  return hsh;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void dump_rec(const Json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string pad2(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad2 + Json(it.key()).dump() + ": ";
        dump_rec(*it, out, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) out += ",\n";
        out += pad2;
        dump_rec(j[k], out, indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float: {
      double v = j.get<double>();
      if (std::isnan(v))
        out += "\"nan\"";
      else if (std::isinf(v))
        out += v > 0 ? "\"inf\"" : "\"-inf\"";
      else {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        std::string s = buf;
        if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
        out += s;
      }
      return;
    }
    default: out += j.dump();
  }
}

Json vec_json(const Vec& x, int dim) {
  Json a = Json::array();
  for (int i = 0; i < dim; ++i) a.push_back(x[i]);
  return a;
}

Json nums(const std::vector<double>& v) { return Json(v); }

// ---------------------------------------------------------------- data

double tn(const Vec& x, int dim) { return x[dim - 2]; }
double tnp1(const Vec& x, int dim) { return x[dim - 1]; }

ScalarFn make_data(const Json& d, int dim) {
  const std::string kind = d["kind"];
  const double beta = d["beta"], e = d["exponent"], m = d["angular"], c = d["coefficient"];
  if (kind == "w32")
    return [dim, beta](const Vec& x) {
      Vec y = x;
      for (int a = 0; a < dim - 2; ++a) y[dim - 2] -= beta * x[a] * x[a];
      return w32(y, dim);
    };
  if (kind == "zero") return [](const Vec&) { return 0.0; };
  if (kind == "abs_normal") return [dim](const Vec& x) { return std::abs(tnp1(x, dim)); };
  if (kind == "polynomial2") return [dim](const Vec& x) { return tn(x, dim) * tn(x, dim) - tnp1(x, dim) * tnp1(x, dim); };
  if (kind == "w32_plus_linear") return [dim, c](const Vec& x) { return w32(x, dim) + c * tnp1(x, dim); };
  return [dim, e, m](const Vec& x) {
    double r = std::hypot(tn(x, dim), tnp1(x, dim));
    return std::pow(r, e) * std::cos(m * std::atan2(std::abs(tnp1(x, dim)), tn(x, dim)));
  };
}

ScalarFn make_rhs(const Json& r, int dim, double h) {
  const std::string kind = r["kind"];
  if (kind == "zero") return {};
  if (kind == "constant") {
    double v = r["value"];
    return [v](const Vec&) { return v; };
  }
  const double c = r["coefficient"], e = r["exponent"], m = r["angular"];
  return [=](const Vec& x) {
    double rho = std::max(std::hypot(tn(x, dim), tnp1(x, dim)), 0.5 * h);
    return c * std::pow(rho, e) * std::cos(m * std::atan2(std::abs(tnp1(x, dim)), tn(x, dim)));
  };
}

std::shared_ptr<const MetricField> make_metric(const Json& m, GridPtr g) {
  if (m["kind"] == "identity") return std::make_shared<const MetricField>(make_identity(g));
  Vec k{m["wavevector"][0].get<double>(), m["wavevector"][1].get<double>(), m["wavevector"][2].get<double>()};
  double p = m["p"].is_string() ? kInf : m["p"].get<double>();
  return std::make_shared<const MetricField>(make_perturbed(g, m["amplitude"].get<double>(), k, p));
}


// Chebyshev radius (in cells) within which every misclassified thin node finds
// a node of the other expected class; 0 when the classes agree everywhere.
double contact_mismatch_cells(const SlitSet& slit, const ScalarFn& data) {
  const Grid& g = *slit.grid;
  const int n = g.n();
  auto expect = [&](std::size_t id) { return data(g.point(id)) <= 1e-14; };
  double worst = 0.0;
  for (std::size_t id : g.plane_nodes()) {
    if (static_cast<bool>(slit.in_lambda[id]) == expect(id)) continue;
    bool e = expect(id);
    Idx i0 = g.multi(id);
    int found = 99;
    for (int r = 1; r <= 6 && found == 99; ++r)
      for (int a = -r; a <= r && found == 99; ++a)
        for (int b = (n > 1 ? -r : 0); b <= (n > 1 ? r : 0) && found == 99; ++b) {
          Idx i = i0;
          i[0] += a;
          if (n > 1) i[1] += b;
          if (!g.in_storage(i)) continue;
          std::size_t j = g.index(i);
          if (g.active(j) && expect(j) != e) found = r;
        }
    worst = std::max(worst, static_cast<double>(found));
  }
  return worst;
}

struct StageLog {
  Json& summary;
  Json& timing;
  Json errors = Json::array();
  template <class F>
  void run(const std::string& name, bool enabled, F&& fn) {
    if (!enabled) {
      summary["stages"][name] = "skipped";
      return;
    }
    auto t0 = std::chrono::steady_clock::now();
    try {
      fn();
      summary["stages"][name] = "ok";
    } catch (const Error& e) {
      summary["stages"][name] = "failed";
      errors.push_back({{"stage", name}, {"code", static_cast<int>(e.code())}, {"message", e.what()}});
    } catch (const std::exception& e) {
      summary["stages"][name] = "failed";
      errors.push_back({{"stage", name}, {"code", static_cast<int>(ErrorCode::Internal)}, {"message", e.what()}});
    }
    timing["stages"][name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

void write_slit_csv(const SlitSet& s, const std::string& path) {
  const Grid& g = *s.grid;
  std::ofstream os(path);
  os.precision(17);
  const int n = g.n();
  for (int a = 0; a < n; ++a) os << "x" << a << ",";
  os << "in_lambda,gamma\n";
  std::vector<std::uint8_t> isg(g.size(), 0);
  for (std::size_t id : s.gamma) isg[id] = 1;
  for (std::size_t id : g.plane_nodes()) {
    Vec x = g.point(id);
    for (int a = 0; a < n; ++a) os << x[a] << ",";
    os << int(s.in_lambda[id]) << "," << int(isg[id]) << "\n";
  }
}

void write_graph_csv(const GraphFit& gf, const std::string& path) {
  std::ofstream os(path);
  os.precision(17);
  os << "xpp,g,g_node,grad_g\n";
  for (std::size_t c = 0; c < gf.g.size(); ++c) os << gf.xpp[c] << "," << gf.g[c] << "," << gf.g_node[c] << "," << gf.grad_g[c] << "\n";
}

}  // namespace

// ---------------------------------------------------------------- public helpers

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorCode::Io, "cannot read " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorCode::Io, "cannot write " + path);
  os << text;
}

std::string dump_json(const Json& j) {
  std::string out;
  dump_rec(j, out, 0);
  out += "\n";
  return out;
}

void save_field(const Field& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorCode::Io, "cannot write " + path);
  const Grid& g = *f.grid;
  std::int32_t hdr[4] = {g.dim(), g.inv_h(), g.half() ? 1 : 0, static_cast<std::int32_t>(f.mode)};
  std::uint64_t n = f.v.size();
  os.write("SGNFLD01", 8);
  os.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
  os.write(reinterpret_cast<const char*>(&n), sizeof n);
  os.write(reinterpret_cast<const char*>(f.v.data()), static_cast<std::streamsize>(n * sizeof(double)));
}

Field load_field(GridPtr grid, const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorCode::Io, "cannot read " + path);
  char magic[8];
  std::int32_t hdr[4];
  std::uint64_t n = 0;
  is.read(magic, 8);
  is.read(reinterpret_cast<char*>(hdr), sizeof hdr);
  is.read(reinterpret_cast<char*>(&n), sizeof n);
  require(is && std::memcmp(magic, "SGNFLD01", 8) == 0, ErrorCode::Io, path + ": not a solution field");
  require(hdr[0] == grid->dim() && hdr[1] == grid->inv_h() && hdr[2] == (grid->half() ? 1 : 0) && n == grid->size(),
          ErrorCode::Io, path + ": grid mismatch");
  Field f(grid, static_cast<FieldMode>(hdr[3]));
  is.read(reinterpret_cast<char*>(f.v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  require(static_cast<bool>(is), ErrorCode::Io, path + ": truncated");
  return f;
}

Json parse_config_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t pos = e.byte > 0 ? e.byte - 1 : 0;
    int line = line_of(text, pos);
    std::size_t ls = text.rfind('\n', pos > 0 ? pos - 1 : 0);
    int col = static_cast<int>(pos - (ls == std::string::npos ? 0 : ls + 1)) + 1;
    std::string msg = e.what();
    std::size_t k = msg.find("parse error");
    fail(ErrorCode::Config, "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                                (k == std::string::npos ? msg : msg.substr(k)));
  }
}

Json normalize_config(const Json& cfg, const std::string& source_text) {
  require(cfg.is_object(), ErrorCode::Config, "config must be a JSON object");
  Json def = Json::parse(kDefaults);
  Issues is;
  check_keys(cfg, def, "", is);
  if (is.list.empty()) {
    Json merged = def;
    merged.merge_patch(cfg);
    try {
      validate(merged, is);
    } catch (const Json::exception& e) {
      is.add("", std::string("malformed value: ") + e.what());
    }
    if (is.list.empty()) return merged;
  }
  std::string msg;
  for (const auto& [path, m] : is.list) {
    int line = line_of_path(source_text, path);
    if (!msg.empty()) msg += "\n";
    msg += (line > 0 ? "line " + std::to_string(line) + ": " : std::string()) + path + ": " + m;
  }
  fail(ErrorCode::Config, msg);
}

Json load_config(const std::string& path) {
  std::string text = read_text_file(path);
  return normalize_config(parse_config_text(text), text);
}

std::vector<std::string> preset_names() {
  return {"constant_w32",      "trivial_zero",      "degree2_field",      "perturbed_2d_128",   "perturbed_2d_256",
          "perturbed_3d_a050", "perturbed_3d_a025", "barrier_flat",       "barrier_perturbed",  "degenerate_2d",
          "interior_abs",      "interior_manufactured", "inhomogeneous_q3", "inhomogeneous_qinf"};
}

Json preset_config(const std::string& name) {
  Json c = {{"schema_version", kSchemaVersion}, {"name", name}, {"seed", 0}};
  auto off = [&](std::initializer_list<const char*> stages) {
    for (const char* s : stages) c["analysis"][s]["enabled"] = false;
  };
  if (name == "constant_w32") {
    c["grid"] = {{"dim", 2}, {"inv_h", 256}};
    c["problem"] = {{"data", {{"kind", "w32"}}}, {"reference", "data"}, {"expected_contact", "data"}};
    c["solve"] = {{"continuation", 2}};
    c["analysis"]["holder"]["enabled"] = true;
  } else if (name == "trivial_zero") {
    c["grid"] = {{"dim", 2}, {"inv_h", 64}};
    c["problem"] = {{"data", {{"kind", "zero"}}}, {"reference", "data"}};
  } else if (name == "degree2_field") {
    c["grid"] = {{"dim", 2}, {"inv_h", 256}};
    c["problem"] = {{"data", {{"kind", "polynomial2"}}}};
    c["solve"] = {{"enabled", false}};
    c["analysis"]["centers"] = {{"explicit", {{0.0, 0.0, 0.0}}}};
    c["analysis"]["vanishing_order"] = {{"kappa_lo", 1.9}, {"kappa_hi", 2.1}};
    off({"expansion", "growth", "flatness", "quotient"});
  } else if (name == "perturbed_2d_128" || name == "perturbed_2d_256") {
    c["grid"] = {{"dim", 2}, {"inv_h", name == "perturbed_2d_128" ? 128 : 256}};
    c["metric"] = {{"kind", "perturbed"}, {"amplitude", 0.05}};
    c["solve"] = {{"continuation", 2}};
    c["analysis"]["holder"]["enabled"] = true;
    if (name == "perturbed_2d_128") c["analysis"]["split"]["enabled"] = true;
  } else if (name == "perturbed_3d_a050" || name == "perturbed_3d_a025") {
    bool full = name == "perturbed_3d_a025";
    c["grid"] = {{"dim", 3}, {"inv_h", 128}};
    c["metric"] = {{"kind", "perturbed"}, {"amplitude", full ? 0.025 : 0.05}};
    c["problem"] = {{"data", {{"kind", "w32"}, {"beta", 0.15}}}};
    c["solve"] = {{"continuation", 3}};
    c["analysis"]["blowup"]["enabled"] = full;
    if (!full) off({"expansion", "quotient"});
  } else if (name == "barrier_flat" || name == "barrier_perturbed") {
    c["grid"] = {{"dim", 2}, {"inv_h", 256}};
    if (name == "barrier_perturbed") c["metric"] = {{"kind", "perturbed"}, {"amplitude", 0.05}};
    c["problem"] = {{"data", {{"kind", "zero"}}}};
    c["solve"] = {{"enabled", false}};
    c["analysis"]["barrier"]["enabled"] = true;
    off({"vanishing_order", "expansion", "growth", "flatness", "quotient"});
  } else if (name == "degenerate_2d") {
    c["grid"] = {{"dim", 2}, {"inv_h", 128}};
    c["problem"] = {{"data", {{"kind", "zero"}}}};
    c["solve"] = {{"enabled", false}};
    c["analysis"]["degenerate"]["enabled"] = true;
    off({"vanishing_order", "expansion", "growth", "flatness", "quotient"});
  } else if (name == "interior_abs") {
    c["grid"] = {{"dim", 2}, {"inv_h", 128}};
    c["problem"] = {{"mode", "interior"}, {"data", {{"kind", "abs_normal"}}}};
    c["analysis"]["interior"]["enabled"] = true;
    off({"vanishing_order", "expansion", "growth", "flatness", "quotient"});
  } else if (name == "interior_manufactured") {
    c["grid"] = {{"dim", 2}, {"inv_h", 128}};
    c["problem"] = {{"mode", "interior"}, {"data", {{"kind", "w32_plus_linear"}, {"coefficient", 0.3}}}};
    c["solve"] = {{"enabled", false}};
    c["analysis"]["expansion"]["interior"] = true;
    c["analysis"]["interior"]["enabled"] = true;
    off({"growth", "flatness", "quotient"});
  } else if (name == "inhomogeneous_q3") {
    c["grid"] = {{"dim", 2}, {"inv_h", 128}};
    c["problem"] = {{"data", {{"kind", "power"}, {"exponent", 1.4}, {"angular", 1.5}}},
                    {"rhs", {{"kind", "power"}, {"coefficient", 1.96 - 2.25}, {"exponent", -0.6}, {"angular", 1.5}}},
                    {"q", 3.0},
                    {"reference", "data"}};
    c["solve"] = {{"continuation", 2}};
    c["analysis"]["vanishing_order"] = {{"kappa_lo", 1.3}, {"kappa_hi", 1.5}};
    off({"expansion"});
  } else if (name == "inhomogeneous_qinf") {
    c["grid"] = {{"dim", 2}, {"inv_h", 128}};
    c["problem"] = {{"data", {{"kind", "w32"}}}, {"rhs", {{"kind", "constant"}, {"value", 1.0}}}};
    c["solve"] = {{"continuation", 2}};
    off({"expansion"});
  } else {
    fail(ErrorCode::InvalidArgument, "unknown preset '" + name + "'");
  }
  return normalize_config(c);
}

// ---------------------------------------------------------------- pipeline

Json run_experiment(const Json& config_in, const RunOptions& opt) {
  const Json cfg = normalize_config(config_in);
  require(!opt.out_dir.empty(), ErrorCode::InvalidArgument, "run: output directory missing");
  fs::create_directories(opt.out_dir);
  const std::string cache_dir = opt.cache_dir.empty() ? (fs::path(opt.out_dir) / "cache").string() : opt.cache_dir;
  const fs::path out(opt.out_dir);
  write_text_file((out / "config.json").string(), dump_json(cfg));

  const int dim = cfg["grid"]["dim"];
  const int inv = cfg["grid"]["inv_h"];
  const double h = 1.0 / inv;
  const Json& P = cfg["problem"];
  const Json& A = cfg["analysis"];
  const SolveMode mode = parse_mode(P["mode"].get<std::string>());
  const bool interior = mode == SolveMode::Interior;
  auto grid = std::make_shared<const Grid>(GridSpec{dim, inv, !interior});
  const ScalarFn data = make_data(P["data"], dim);
  const bool write_fields = cfg["output"]["write_fields"];

  Json summary = {{"schema_version", kSchemaVersion}, {"name", cfg["name"]}, {"seed", cfg["seed"]}};
  Json timing = Json::object();
  summary["config_hash"] = hex(fnv1a(dump_json(cfg)));
  summary["grid"] = {{"dim", dim}, {"inv_h", inv}, {"h", h}, {"half", !interior}, {"nodes", grid->active_nodes().size()}};
  StageLog log{summary, timing};

  std::shared_ptr<const MetricField> metric;
  log.run("metric", true, [&] {
    metric = make_metric(cfg["metric"], grid);
    AssumptionReport ar = check_assumptions(*metric);
    Json checks = Json::array();
    for (const auto& c : ar.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"worst", c.worst}});
    summary["metric"] = {{"cstar", metric->cstar()}, {"p", metric->p()}, {"assumptions_pass", ar.all_pass()},
                         {"morrey_ratio", ar.morrey_ratio}, {"checks", checks}};
  });
  if (!metric) {
    summary["errors"] = log.errors;
    write_text_file((out / "summary.json").string(), dump_json(summary));
    write_text_file((out / "error_manifest.json").string(), dump_json(log.errors));
    return summary;
  }

  // Solve (cached by the hash of the defining subtrees) or sample the data.
  Field w;
  Field phi(grid);
  const bool solve = cfg["solve"]["enabled"];
  log.run("solve", true, [&] {
    Json key = {{"grid", cfg["grid"]}, {"metric", cfg["metric"]}, {"problem", P}, {"solve", cfg["solve"]}};
    const std::string tag = hex(fnv1a(dump_json(key)));
    Json meta;
    if (!solve) {
      w = sample(grid, data, interior ? FieldMode::InteriorObstacle : FieldMode::BoundaryObstacle);
      meta = {{"converged", true}, {"sweeps", 0}, {"seconds", 0.0}, {"pde_residual", 0.0},
              {"complementarity_residual", 0.0}, {"energy", 0.0}, {"omega", 0.0}};
    } else {
      fs::path cf = fs::path(cache_dir) / (tag + ".bin"), cm = fs::path(cache_dir) / (tag + ".json");
      bool hit = fs::exists(cf) && fs::exists(cm);
      if (hit) {
        try {
          w = load_field(grid, cf.string());
          meta = Json::parse(read_text_file(cm.string()));
        } catch (const std::exception&) {
          hit = false;
        }
      }
      timing["cache_hit"] = hit;
      if (!hit) {
        ProblemSpec ps;
        ps.metric = metric;
        ps.mode = mode;
        ps.dirichlet = data;
        if (P["obstacle"]["kind"] == "quadratic") {
          const double oc = P["obstacle"]["coefficient"];
          ps.phi = [oc, dim](const Vec& x) {
            double r2 = 0.0;
            for (int a = 0; a < dim - 1; ++a) r2 += x[a] * x[a];
            return -oc * r2;
          };
        } else {
          ps.phi = [](const Vec&) { return 0.0; };
        }
        ps.f = make_rhs(P["rhs"], dim, h);
        ps.q = P["q"].is_string() ? kInf : P["q"].get<double>();
        ps.params.tol = cfg["solve"]["tol"];
        ps.params.continuation = cfg["solve"]["continuation"];
        ps.params.omega = cfg["solve"]["omega"];
        ps.params.max_sweeps = cfg["solve"]["max_sweeps"];
        SolveReport rep = solve_psor(ps);
        w = rep.w;
        meta = {{"converged", rep.converged},
                {"sweeps", rep.sweeps},
                {"seconds", rep.seconds},
                {"pde_residual", rep.pde_residual},
                {"complementarity_residual", rep.complementarity_residual},
                {"energy", rep.energy},
                {"omega", rep.omega}};
        fs::create_directories(cache_dir);
        save_field(w, cf.string());
        write_text_file(cm.string(), dump_json(meta));
      }
    }
    timing["solve_seconds"] = meta["seconds"];
    Json s = meta;
    s.erase("seconds");
    s["solved"] = solve;
    s["cache_key"] = tag;
    s["runtime_budget_s"] = cfg["solve"]["runtime_budget_s"];
    s["runtime_budget_met"] = meta["seconds"].get<double>() <= cfg["solve"]["runtime_budget_s"].get<double>();
    if (P["reference"] == "data") {
      double err = 0.0;
      for (std::size_t id : grid->active_nodes()) err = std::max(err, std::abs(w.v[id] - data(grid->point(id))));
      s["max_error"] = err;
    }
    s["l2_norm"] = solution_l2_norm(w);
    summary["solve"] = s;
    if (write_fields) save_field(w, (out / "solution.bin").string());
    write_text_file((out / "solve_report.json").string(), dump_json(summary["solve"]));
  });
  if (w.grid == nullptr) {
    summary["errors"] = log.errors;
    write_text_file((out / "summary.json").string(), dump_json(summary));
    write_text_file((out / "error_manifest.json").string(), dump_json(log.errors));
    write_text_file((out / "timing.json").string(), dump_json(timing));
    return summary;
  }

  // Contact set, free boundary and graph.
  SlitSet slit;
  GraphFit gf;
  bool have_gamma = false, have_graph = false;
  log.run("free_boundary", true, [&] {
    slit = extract_sets(w, &phi, A["contact_tol"].get<double>());
    have_gamma = slit.has_gamma();
    Json fb = {{"no_free_boundary", !have_gamma},
               {"lambda_nodes", slit.lambda.size()},
               {"omega_nodes", slit.omega.size()},
               {"gamma_nodes", slit.gamma.size()}};
    if (P["expected_contact"] == "data") fb["contact_mismatch_cells"] = contact_mismatch_cells(slit, data);
    write_slit_csv(slit, (out / "slit.csv").string());
    if (have_gamma) {
      try {
        gf = fit_graph(slit, &w, &phi, A["graph_window"].get<double>(), A["graph_smooth"].get<int>());
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Precondition) throw;
        fb["graph"] = nullptr;
        fb["graph_note"] = e.what();
      }
      have_graph = !gf.g.empty();
    }
    if (have_graph) {
      fb["graph"] = {{"columns", gf.g.size()},
                     {"side", gf.side},
                     {"lipschitz", gf.lipschitz},
                     {"holder_alpha", gf.holder_alpha},
                     {"holder_seminorm", gf.holder_seminorm}};
      write_graph_csv(gf, (out / "graph.csv").string());
    }
    summary["free_boundary"] = fb;
  });
  if (interior) {
    log.run("interior", A["interior"]["enabled"].get<bool>(), [&] {
      std::vector<double> jump = flux_jump(w);
      double jmin = kInf;
      for (std::size_t id : grid->plane_nodes())
        if (grid->kind(id) == NodeKind::Interior) jmin = std::min(jmin, jump[id]);
      Json in = {{"jump_min", jmin}};
      if (have_gamma) {
        Vec x0 = have_graph ? gf.point(0) : grid->point(slit.gamma.front());
        std::size_t best = slit.gamma.front();
        for (std::size_t id : slit.gamma)
          if (norm(sub(grid->point(id), x0)) < norm(sub(grid->point(best), x0))) best = id;
        in["b_tilde_normalized"] = normalize_interior(w, slit.gamma, best).b_tilde;
      }
      summary["interior"] = in;
    });
  }

  // Centers.
  std::vector<Vec> centers;
  if (!A["centers"]["explicit"].empty()) {
    for (const Json& e : A["centers"]["explicit"]) centers.push_back({e[0].get<double>(), e[1].get<double>(), e[2].get<double>()});
  } else if (have_graph) {
    if (dim == 2) {
      centers.push_back(gf.point(0));
    } else {
      const int cnt = A["centers"]["count"];
      const double sp = A["centers"]["spacing"];
      for (int k = 0; k < cnt; ++k) {
        double xpp = (k - 0.5 * (cnt - 1)) * sp;
        centers.push_back(gf.point(gf.column_near(Vec{xpp, 0.0, 0.0})));
      }
    }
  }
  const bool fits = have_gamma && !centers.empty();
  Json cj = Json::array();
  for (const Vec& x0 : centers) cj.push_back({{"x0", vec_json(x0, dim)}});

  log.run("flatness", fits && have_graph && dim == 3 && A["flatness"]["enabled"].get<bool>(), [&] {
    std::vector<double> scales = geometric_radii(A["flatness"]["rmin_cells"].get<double>() * h, A["flatness"]["rmax"].get<double>());
    FlatnessReport fr = reifenberg_delta(gf.curve(h / 32, true), centers, scales, dim, h);
    std::size_t ok = 0;
    for (auto t : fr.trend_ok) ok += t ? 1 : 0;
    summary["flatness"] = {{"worst_delta", fr.worst_delta},
                           {"scales", nums(scales)},
                           {"trend_slope", nums(fr.trend_slope)},
                           {"trend_ok_fraction", fr.trend_ok.empty() ? 0.0 : double(ok) / double(fr.trend_ok.size())}};
    std::ofstream os((out / "flatness.csv").string());
    os.precision(17);
    os << "x0,x1,r,delta,skipped\n";
    for (const auto& e : fr.entries) os << e.x0[0] << "," << e.x0[1] << "," << e.r << "," << e.delta << "," << e.skipped << "\n";
  });
  log.run("quotient", have_graph && dim == 3 && A["quotient"]["enabled"].get<bool>(), [&] {
    QuotientReport q = quotient_regularity(w, gf, 0);
    summary["quotient"] = {{"columns", q.columns.size()}, {"max_mismatch", q.max_mismatch}, {"median_exponent", q.median_exponent}};
  });

  std::vector<char> regular(centers.size(), 0);
  std::vector<VanishingOrderEstimate> vos(centers.size());
  log.run("vanishing_order", !centers.empty() && A["vanishing_order"]["enabled"].get<bool>(), [&] {
    const double lo = A["vanishing_order"]["kappa_lo"], hi = A["vanishing_order"]["kappa_hi"];
    // Interior solutions carry an odd part b x_{n+1}; the order is read off the even part.
    Field we = w;
    if (interior)
      for (std::size_t id : grid->active_nodes()) we.v[id] = 0.5 * (w.v[id] + w.v[grid->reflect(id)]);
    std::ofstream os((out / "vanishing_orders.csv").string());
    os.precision(17);
    os << "center,r,norm\n";
    for (std::size_t k = 0; k < centers.size(); ++k) {
      vos[k] = vanishing_order(we, centers[k]);
      regular[k] = vos[k].trusted && !vos[k].infinite && vos[k].kappa >= lo && vos[k].kappa <= hi;
      cj[k]["kappa"] = vos[k].kappa;
      cj[k]["kappa_r2"] = vos[k].r2;
      cj[k]["infinite_order"] = vos[k].infinite;
      cj[k]["regular"] = static_cast<bool>(regular[k]);
      for (std::size_t j = 0; j < vos[k].radii.size(); ++j) os << k << "," << vos[k].radii[j] << "," << vos[k].norms[j] << "\n";
    }
  });
  log.run("expansion", fits && have_graph && A["expansion"]["enabled"].get<bool>(), [&] {
    Json ex = Json::array();
    for (std::size_t k = 0; k < centers.size(); ++k) {
      if (!regular[k]) continue;
      AsymptoticFrame fr = frame_at(centers[k], *metric, gf);
      ExpansionOptions eo;
      eo.radius = A["expansion"]["radius"];
      eo.interior = A["expansion"]["interior"];
      eo.higher_order = A["expansion"]["higher_order"];
      eo.kappa_lo = A["vanishing_order"]["kappa_lo"];
      eo.kappa_hi = A["vanishing_order"]["kappa_hi"];
      ExpansionFit fit = fit_expansion(w, fr.x0, fr, vos[k].kappa, eo);
      CompatibilityReport cc = check_compatibility(fit);
      Json e = {{"a", fit.a},
                {"b_nu", fit.b_nu},
                {"b_np1", fit.b_np1},
                {"b_tilde", fit.b_tilde},
                {"b_e", nums(fit.b_e)},
                {"c1", fit.frame.c1},
                {"c2", fit.frame.c2},
                {"nu", vec_json(fit.frame.nu, dim)},
                {"center_shift", fit.center_shift},
                {"residual_exponent", fit.residual_exponent},
                {"residual_r2", fit.residual_r2},
                {"residual_shells", fit.residual_shells},
                {"curl_defect", cc.curl_defect},
                {"defa_defect", cc.defa_defect},
                {"direction_defects", nums(cc.direction_defects)}};
      cj[k]["expansion"] = e;
      Json row = e;
      row["center"] = k;
      ex.push_back(row);
    }
    write_text_file((out / "expansions.json").string(), dump_json(ex));
  });
  log.run("growth", fits && A["growth"]["enabled"].get<bool>(), [&] {
    GrowthOptions go;
    go.rmin_cells = A["growth"]["rmin_cells"];
    go.rmax = A["growth"]["rmax"];
    std::vector<GrowthReport> gr = growth_exponents(w, slit, have_graph ? &gf : nullptr, centers, go);
    std::ofstream os((out / "growth.csv").string());
    os.precision(17);
    os << "center,r,sup_w,sup_grad\n";
    for (std::size_t k = 0; k < gr.size(); ++k) {
      cj[k]["growth"] = {{"slope_w", gr[k].slope_w},
                         {"r2_w", gr[k].r2_w},
                         {"slope_grad", gr[k].slope_grad},
                         {"r2_grad", gr[k].r2_grad},
                         {"cone_lower_ratio", gr[k].cone_lower_ratio}};
      for (std::size_t j = 0; j < gr[k].radii.size(); ++j)
        os << k << "," << gr[k].radii[j] << "," << gr[k].sup_w[j] << "," << gr[k].sup_grad[j] << "\n";
    }
  });
  log.run("blowup", fits && have_graph && A["blowup"]["enabled"].get<bool>(), [&] {
    for (std::size_t k = 0; k < centers.size(); ++k) {
      if (!regular[k]) continue;
      AsymptoticFrame fr = frame_at(centers[k], *metric, gf);
      std::vector<double> dist;
      for (const Json& r : A["blowup"]["radii"]) dist.push_back(c1_distance_to_model(w, fr.x0, r.get<double>()).distance);
      bool dec = true;
      for (std::size_t j = 1; j < dist.size(); ++j) dec = dec && dist[j] < dist[j - 1];
      cj[k]["blowup"] = {{"radii", A["blowup"]["radii"]}, {"distance", nums(dist)}, {"strictly_decreasing", dec}};
    }
  });
  summary["centers"] = cj;

  log.run("holder", A["holder"]["enabled"].get<bool>(), [&] {
    const Vec c0{0, 0, 0};
    const double R = A["holder"]["radius"];
    const Json& nb = A["holder"]["near"];
    const Json& fb = A["holder"]["far"];
    double s05 = holder_seminorm_gradient(w, c0, R, 0.5);
    double n06 = holder_seminorm_gradient(w, c0, R, 0.6, nb[0].get<double>(), nb[1].get<double>());
    double f06 = holder_seminorm_gradient(w, c0, R, 0.6, fb[0].get<double>(), fb[1].get<double>());
    summary["holder"] = {{"seminorm_05", s05}, {"near_06", n06}, {"far_06", f06}, {"ratio_06", f06 > 0 ? n06 / f06 : 0.0}};
  });

  log.run("split", have_gamma && !interior && A["split"]["enabled"].get<bool>(), [&] {
    const double K0 = default_potential(A["split"]["sigma"].get<double>());
    std::vector<double> Ks, mx, ratio;
    for (const Json& f : A["split"]["k_factors"]) {
      SplitPair sp = split_tangential_derivative(w, *metric, slit, 0, f.get<double>() * K0, A["split"]["sigma"].get<double>());
      double m = 0.0;
      for (std::size_t id : sp.u_err.grid->active_nodes()) m = std::max(m, std::abs(sp.u_err.v[id]));
      Ks.push_back(sp.K);
      mx.push_back(m);
      ratio.push_back(sp.err_ratio);
    }
    bool mono = true;
    for (std::size_t j = 1; j < mx.size(); ++j) mono = mono && mx[j] <= mx[j - 1];
    summary["split"] = {{"K", nums(Ks)}, {"max_v1", nums(mx)}, {"err_ratio", nums(ratio)}, {"non_increasing", mono}};
  });

  log.run("degenerate", A["degenerate"]["enabled"].get<bool>(), [&] {
    auto full = std::make_shared<const Grid>(GridSpec{dim, inv, false});
    auto fm = make_metric(cfg["metric"], full);
    SlitSet fs_ = slit_from_predicate(full, [dim](const Vec& x) { return x[dim - 2] <= 1e-12; });
    Json dg = Json::object();
    if (A["degenerate"]["manufactured"].get<bool>()) {
      SplitProblem sp;
      sp.metric = fm;
      sp.slit = fs_;
      Field us = sample(full, [dim](const Vec& x) {
        double a = x[dim - 2], b = x[dim - 1];
        double dl = a > 0 ? std::abs(b) : std::hypot(a, b);
        double r2 = 0.0;
        for (int i = 0; i < dim; ++i) r2 += x[i] * x[i];
        return r2 < 1.0 ? dl * (1 - r2) * (1 - r2) * std::cos(3 * a) : 0.0;
      });
      for (std::size_t id : full->active_nodes())
        if (full->kind(id) != NodeKind::Interior || (full->on_plane(id) && fs_.in_lambda[id])) us.v[id] = 0.0;
      sp.g = apply_degenerate(sp, us);
      DegenerateSolution sol = solve_degenerate(sp);
      double err = 0.0;
      for (std::size_t id : full->active_nodes()) err = std::max(err, std::abs(sol.u.v[id] - us.v[id]));
      dg["manufactured_error"] = err;
      dg["manufactured_residual"] = sol.residual;
    }
    Json decay = Json::array();
    for (const Json& e : A["degenerate"]["decay"]) {
      const double p = e["p"].is_string() ? kInf : e["p"].get<double>();
      const double sig = e["sigma"];
      SplitProblem sp;
      sp.metric = fm;
      sp.slit = fs_;
      sp.sigma = sig;
      sp.p = p;
      for (int a = 0; a < dim; ++a) sp.F[a].assign(full->size(), 0.0);
      for (std::size_t id : full->active_nodes()) {
        Vec x = full->point(id);
        double r = std::max(std::hypot(x[dim - 2], x[dim - 1]), 0.5 * h);
        sp.F[dim - 2][id] = std::pow(r, sig) * x[dim - 2] / r;
        sp.F[dim - 1][id] = std::pow(r, sig) * x[dim - 1] / r;
      }
      DegenerateSolution sol = solve_degenerate(sp);
      DecayFit df = ray_decay(sol.u, fs_, Vec{0, 0, 0}, A["degenerate"]["dmin_cells"].get<double>() * h,
                              A["degenerate"]["dmax"].get<double>());
      const double gamma = std::isinf(p) ? 1.0 : 1.0 - dim / p;
      decay.push_back({{"p", std::isinf(p) ? Json("inf") : Json(p)},
                       {"sigma", sig},
                       {"K", sol.K},
                       {"slope", df.slope},
                       {"r2", df.r2},
                       {"bound", gamma + sig - 0.1}});
    }
    dg["decay"] = decay;
    summary["degenerate"] = dg;
  });

  log.run("barrier", A["barrier"]["enabled"].get<bool>(), [&] {
    const Json& B = A["barrier"];
    auto full = std::make_shared<const Grid>(GridSpec{dim, inv, false});
    auto fm = make_metric(cfg["metric"], full);
    SlitSet bs;
    if (B["slit"] == "flat")
      bs = slit_from_predicate(full, [dim](const Vec& x) { return x[dim - 2] <= 1e-12; });
    else {
      require(have_gamma, ErrorCode::Precondition, "barrier: the solution has no free boundary");
      bs = interior ? slit : transfer_slit(slit, full);
    }
    WhitneyDecomposition wd = whitney_decompose(bs);
    WhitneyCheck wc = check_whitney(wd);
    NormalCertificate nc = approximate_normals(wd, bs);
    write_whitney_csv(wd, (out / "whitney.csv").string());
    Json bj = {{"whitney",
                {{"cubes", wc.cubes},
                 {"w1_min", wc.w1_min},
                 {"w1_max", wc.w1_max},
                 {"w2_min", wc.w2_min},
                 {"w2_max", wc.w2_max},
                 {"max_touching", wc.max_touching},
                 {"touching_bound", wc.touching_bound},
                 {"symmetric", wc.symmetric},
                 {"pass", wc.pass()}}},
               {"normals",
                {{"max_jump", nc.max_jump}, {"certificate", nc.certificate}, {"max_flatness", nc.max_flatness}, {"clamped", nc.clamped}}}};
    BarrierChart single = make_chart(Vec{0, 0, 0}, dim == 2 ? Vec{1, 0, 0} : Vec{0, 1, 0}, interpolate_tensor(*fm, Vec{0, 0, 0}), dim);
    Json kinds = Json::object();
    for (const Json& kj : B["kinds"]) {
      BarrierKind kind = parse_barrier_kind(kj.get<std::string>());
      BarrierField bf = build_barrier(kind, B["s"].get<double>(), wd, *fm, bs, B["K"].get<double>());
      BarrierReport br = verify_barrier(bf, *fm, bs, B["dmin_cells"].get<double>(), -1.0, B["alpha"].get<double>());
      double dev = 0.0;
      const ProfileKind pk = kind == BarrierKind::HMinusS ? ProfileKind::W12Power : ProfileKind::W12;
      for (std::size_t id : full->active_nodes()) {
        Vec y = single.apply(full->point(id), dim);
        dev = std::max(dev, std::abs(bf.blend.v[id] - eval_profile(pk, y[dim - 2], y[dim - 1], bf.s)));
      }
      Json r = {{"s", br.s},
                {"dmin", br.dmin},
                {"samples", br.samples},
                {"min_weighted_L", br.min_weighted_L},
                {"max_weighted_L", br.max_weighted_L},
                {"argmin", vec_json(br.argmin, dim)},
                {"closed_form_min", br.closed_form_min},
                {"cone_min", br.cone_min},
                {"global_lower", br.global_lower},
                {"lambda_max_abs", br.lambda_max_abs},
                {"g1_norm", br.g1_norm},
                {"g2_norm", br.g2_norm},
                {"K", bf.K},
                {"q_residual", bf.q_residual},
                {"uncovered_nodes", bf.uncovered},
                {"partition_defect", bf.partition_defect},
                {"single_chart_deviation", dev}};
      if (kind == BarrierKind::HMinusS && br.closed_form_min > 0)
        r["relative_deviation"] = br.min_weighted_L / br.closed_form_min - 1.0;
      kinds[kj.get<std::string>()] = r;
      if (write_fields) save_field(bf.values, (out / ("barrier_" + kj.get<std::string>() + ".bin")).string());
    }
    bj["kinds"] = kinds;
    summary["barrier"] = bj;
    write_text_file((out / "barrier_report.json").string(), dump_json(bj));
  });

  summary["errors"] = log.errors;
  write_text_file((out / "summary.json").string(), dump_json(summary));
  write_text_file((out / "timing.json").string(), dump_json(timing));
  if (!log.errors.empty()) write_text_file((out / "error_manifest.json").string(), dump_json(log.errors));
  return summary;
}

// ---------------------------------------------------------------- compare

Json CompareResult::to_json() const {
  Json out = {{"violations", violations}, {"entries", Json::array()}};
  for (const auto& e : entries)
    out["entries"].push_back({{"path", e.path},
                              {"a", e.a},
                              {"b", e.b},
                              {"abs_diff", e.abs_diff},
                              {"ratio", e.ratio},
                              {"tol_abs", e.tol_abs},
                              {"tol_rel", e.tol_rel},
                              {"violated", e.violated}});
  return out;
}

CompareResult compare_summaries(const Json& a, const Json& b, const Json& tolerances) {
  require(a.is_object() && b.is_object(), ErrorCode::InvalidArgument, "compare: summaries must be JSON objects");
  require(a.value("schema_version", -1) == kSchemaVersion && b.value("schema_version", -1) == kSchemaVersion,
          ErrorCode::InvalidArgument, "compare: unsupported or missing schema_version");
  double dabs = 1e-12, drel = 1e-9;
  struct Rule {
    std::string prefix;
    double abs, rel;
    bool ignore;
  };
  std::vector<Rule> rules;
  if (!tolerances.is_null()) {
    require(tolerances.is_object(), ErrorCode::InvalidArgument, "compare: tolerances must be a JSON object");
    for (auto it = tolerances.begin(); it != tolerances.end(); ++it) {
      require(it->is_object(), ErrorCode::InvalidArgument, "compare: tolerance entries must be objects");
      try {
        if (it.key() == "default") {
          dabs = it->value("abs", dabs);
          drel = it->value("rel", drel);
        } else {
          rules.push_back({it.key(), it->value("abs", 0.0), it->value("rel", 0.0), it->value("ignore", false)});
        }
      } catch (const Json::exception&) {
        fail(ErrorCode::InvalidArgument, "compare: malformed tolerance entry '" + it.key() + "'");
      }
    }
  }
  // Longest matching prefix wins; a prefix matches whole path segments only.
  auto rule_for = [&](const std::string& path) {
    const Rule* best = nullptr;
    for (const auto& r : rules) {
      bool match = path.compare(0, r.prefix.size(), r.prefix) == 0 &&
                   (path.size() == r.prefix.size() || path[r.prefix.size()] == '/');
      if (match && (!best || r.prefix.size() >= best->prefix.size())) best = &r;
    }
    return best;
  };
  auto tol_for = [&](const std::string& path) {
    const Rule* r = rule_for(path);
    return r ? std::pair<double, double>{r->abs, r->rel} : std::pair<double, double>{dabs, drel};
  };
  auto numeric = [](const Json& j, double& v) {
    if (j.is_number()) {
      v = j.get<double>();
      return true;
    }
    if (j.is_string()) {
      const std::string s = j;
      if (s == "inf") v = kInf;
      else if (s == "-inf") v = -kInf;
      else if (s == "nan") v = std::nan("");
      else return false;
      return true;
    }
    return false;
  };

  CompareResult res;
  std::function<void(const Json&, const Json&, const std::string&)> walk = [&](const Json& x, const Json& y,
                                                                                const std::string& path) {
    if (const Rule* r = rule_for(path); r && r->ignore) return;
    double vx = 0, vy = 0;
    if (numeric(x, vx) && numeric(y, vy)) {
      if (vx == vy || (std::isnan(vx) && std::isnan(vy))) return;
      auto [ta, tr] = tol_for(path);
      DiffEntry e{path, x, y};
      e.abs_diff = std::abs(vx - vy);
      e.ratio = vx != 0.0 ? vy / vx : kInf;
      e.tol_abs = ta;
      e.tol_rel = tr;
      e.violated = !(e.abs_diff <= std::max(ta, tr * std::max(std::abs(vx), std::abs(vy))));
      if (e.violated) ++res.violations;
      res.entries.push_back(e);
      return;
    }
    require(x.type() == y.type() || (x.is_number() && y.is_number()), ErrorCode::InvalidArgument,
            "compare: schema mismatch at " + (path.empty() ? std::string("/") : path));
    if (x.is_object()) {
      for (auto it = x.begin(); it != x.end(); ++it) {
        require(y.contains(it.key()), ErrorCode::InvalidArgument, "compare: schema mismatch, " + path + "/" + it.key() + " missing in B");
        walk(*it, y[it.key()], path + "/" + it.key());
      }
      for (auto it = y.begin(); it != y.end(); ++it)
        require(x.contains(it.key()), ErrorCode::InvalidArgument, "compare: schema mismatch, " + path + "/" + it.key() + " missing in A");
      return;
    }
    if (x.is_array()) {
      require(x.size() == y.size(), ErrorCode::InvalidArgument, "compare: schema mismatch, array length differs at " + path);
      for (std::size_t k = 0; k < x.size(); ++k) walk(x[k], y[k], path + "/" + std::to_string(k));
      return;
    }
    if (x != y) {
      DiffEntry e{path, x, y};
      e.violated = true;
      ++res.violations;
      res.entries.push_back(e);
    }
  };
  walk(a, b, "");
  return res;
}

}  // namespace signorini
