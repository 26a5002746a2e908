#include <doctest.h>

#include <cmath>

#include "signorini/degenerate.hpp"
#include "signorini/metric.hpp"

using namespace signorini;

namespace {
GridPtr make(int dim, int inv, bool half) { return std::make_shared<const Grid>(GridSpec{dim, inv, half}); }

// dist(x, Lambda) (1 - |x|^2)^2 cos(3 x_n), zero on Lambda and the boundary layer.
Field manufactured(const SlitSet& s) {
  const Grid& g = *s.grid;
  Field u = sample(s.grid, [](const Vec& x) {
    double dl = x[0] > 0 ? std::abs(x[1]) : std::hypot(x[0], x[1]);
    double r2 = x[0] * x[0] + x[1] * x[1];
    return dl * (1 - r2) * (1 - r2) * std::cos(3 * x[0]);
  });
  for (std::size_t id : g.active_nodes())
    if (g.kind(id) != NodeKind::Interior || (g.on_plane(id) && s.in_lambda[id])) u.v[id] = 0.0;
  return u;
}
}  // namespace

TEST_CASE("default potential") {
  CHECK(default_potential(0.0) == 16.0);
  CHECK(default_potential(0.25) == 20.0);
}

TEST_CASE("manufactured solution is recovered to solver precision") {
  auto g = make(2, 64, false);
  SplitProblem sp;
  sp.metric = std::make_shared<const MetricField>(make_perturbed(g, 0.05, {1, 1, 1}, kInf));
  sp.slit = slit_from_predicate(g, [](const Vec& x) { return x[0] <= 1e-12; });
  Field us = manufactured(sp.slit);
  sp.g = apply_degenerate(sp, us);
  DegenerateSolution sol = solve_degenerate(sp);
  double err = 0.0;
  for (std::size_t id : g->active_nodes()) err = std::max(err, std::abs(sol.u.v[id] - us.v[id]));
  CHECK(err <= 1e-6);
  CHECK(sol.K == 16.0);
}

TEST_CASE("zero data gives zero") {
  auto g = make(2, 32, false);
  SplitProblem sp;
  sp.metric = std::make_shared<const MetricField>(make_identity(g));
  sp.slit = slit_from_predicate(g, [](const Vec& x) { return x[0] <= 1e-12; });
  auto r = apply_degenerate(sp, Field(g));
  for (double v : r) CHECK(v == 0.0);
  DegenerateSolution sol = solve_degenerate(sp);
  for (double v : sol.u.v) CHECK(v == 0.0);
}

TEST_CASE("decay from a radial flux reaches the linear rate") {
  auto g = make(2, 64, false);
  SplitProblem sp;
  sp.metric = std::make_shared<const MetricField>(make_identity(g));
  sp.slit = slit_from_predicate(g, [](const Vec& x) { return x[0] <= 1e-12; });
  for (int a = 0; a < 2; ++a) sp.F[a].assign(g->size(), 0.0);
  for (std::size_t id : g->active_nodes()) {
    Vec x = g->point(id);
    double r = std::max(norm(x), 0.5 * g->h());
    sp.F[0][id] = x[0] / r;
    sp.F[1][id] = x[1] / r;
  }
  DegenerateSolution sol = solve_degenerate(sp);
  DecayFit df = ray_decay(sol.u, sp.slit, Vec{0, 0, 0}, 4 * g->h(), 0.25);
  CHECK(df.slope >= 0.9);
}

TEST_CASE("reflection parity") {
  auto half = make(2, 16, true);
  auto full = make(2, 16, false);
  Field f = sample(half, [](const Vec& x) { return x[1] + 2 * x[0]; });
  Field e = reflect_to_full(f, full, 1), o = reflect_to_full(f, full, -1);
  for (std::size_t id : full->active_nodes()) {
    Vec x = full->point(id);
    CHECK(e.v[id] == doctest::Approx(std::abs(x[1]) + 2 * x[0]));
    const double odd = x[1] > 0 ? x[1] + 2 * x[0] : x[1] < 0 ? -(-x[1] + 2 * x[0]) : 0.0;
    CHECK(o.v[id] == doctest::Approx(odd));
  }
}

TEST_CASE("central derivative is exact on quadratics") {
  auto full = make(2, 32, false);
  Field f = sample(full, [](const Vec& x) { return x[0] * x[0] + x[1]; });
  auto d = central_derivative(f, 0);
  std::size_t id = full->nearest_node(Vec{0.25, 0.125, 0});
  CHECK(d[id] == doctest::Approx(0.5));
}
