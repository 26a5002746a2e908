#include <doctest.h>

#include <cmath>

#include "signorini/free_boundary.hpp"
#include "signorini/profiles.hpp"

using namespace signorini;

namespace {
GridPtr make(int dim, int inv, bool half) { return std::make_shared<const Grid>(GridSpec{dim, inv, half}); }

Field w32_graph(GridPtr g, double beta) {
  return sample(g, [beta](const Vec& x) { return w32(Vec{x[1] - beta * x[0] * x[0], x[2], 0}, 2); });
}
}  // namespace

TEST_CASE("contact set of sampled w32 is the negative half-line") {
  auto g = make(2, 64, true);
  Field w = sample(g, [](const Vec& x) { return w32(x, 2); });
  SlitSet s = extract_sets(w, nullptr, 1e-12);
  for (std::size_t id : g->plane_nodes()) CHECK(static_cast<bool>(s.in_lambda[id]) == (g->point(id)[0] <= 1e-12));
  REQUIRE(s.gamma.size() == 1);
  CHECK(norm(g->point(s.gamma[0])) < 1e-12);
}

TEST_CASE("zero field has no free boundary") {
  auto g = make(2, 32, true);
  SlitSet s = extract_sets(Field(g), nullptr, 1e-12);
  CHECK_FALSE(s.has_gamma());
  CHECK(s.omega.empty());
}

TEST_CASE("slit transfer between half and full grids keeps the pattern") {
  auto h = make(2, 32, true);
  auto f = make(2, 32, false);
  SlitSet a = slit_from_predicate(h, [](const Vec& x) { return x[0] <= 0.1; });
  SlitSet b = transfer_slit(a, f);
  CHECK(a.lambda.size() == b.lambda.size());
  CHECK(a.gamma.size() == b.gamma.size());
}

TEST_CASE("graph fit recovers a parabolic free boundary") {
  const double beta = 0.15;
  auto g = make(3, 64, true);
  Field w = w32_graph(g, beta);
  SlitSet s = extract_sets(w, nullptr, 1e-12);
  GraphFit gf = fit_graph(s, &w, nullptr, 0.5);
  REQUIRE(gf.g.size() > 10);
  for (std::size_t c = 0; c < gf.g.size(); ++c) {
    CHECK(std::abs(gf.g[c] - beta * gf.xpp[c] * gf.xpp[c]) < 2e-3);
    CHECK(std::abs(gf.grad_g[c] - 2 * beta * gf.xpp[c]) < 0.02);
  }
  CHECK(gf.lipschitz == doctest::Approx(2 * beta * 0.5).epsilon(0.1));
  CHECK(gf.side == 1);
  Vec nu = gf.normal(gf.column_near(Vec{0, 0, 0}));
  CHECK(nu[1] == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("reifenberg delta: straight line is flat, corner is not") {
  std::vector<Vec> line, corner;
  for (int k = -10000; k <= 10000; ++k) {
    double t = k / 10000.0;
    line.push_back({t, 0.2 * t, 0});
    corner.push_back({t, std::abs(t), 0});
  }
  std::vector<double> scales = {0.25, 0.125, 0.0625};
  FlatnessReport a = reifenberg_delta(line, {Vec{0, 0, 0}}, scales, 3, 1.0 / 128);
  FlatnessReport b = reifenberg_delta(corner, {Vec{0, 0, 0}}, scales, 3, 1.0 / 128);
  CHECK(a.worst_delta < 2e-3);
  CHECK(b.worst_delta > 0.2);
}

TEST_CASE("quotient limit matches the graph slope") {
  auto g = make(3, 64, true);
  Field w = w32_graph(g, 0.15);
  SlitSet s = extract_sets(w, nullptr, 1e-12);
  GraphFit gf = fit_graph(s, &w, nullptr, 0.5);
  QuotientReport q = quotient_regularity(w, gf, 0);
  REQUIRE_FALSE(q.columns.empty());
  CHECK(q.max_mismatch <= 0.05);
}
