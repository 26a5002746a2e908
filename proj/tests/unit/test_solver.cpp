#include <doctest.h>

#include <cmath>

#include "signorini/free_boundary.hpp"
#include "signorini/metric.hpp"
#include "signorini/profiles.hpp"
#include "signorini/solver.hpp"

using namespace signorini;

namespace {
GridPtr make(int dim, int inv, bool half) { return std::make_shared<const Grid>(GridSpec{dim, inv, half}); }

SolveReport solve_w32(int inv) {
  ProblemSpec ps;
  ps.metric = std::make_shared<const MetricField>(make_identity(make(2, inv, true)));
  ps.mode = SolveMode::BoundaryZero;
  ps.dirichlet = [](const Vec& x) { return w32(x, 2); };
  ps.params.continuation = 1;
  return solve_psor(ps);
}
}  // namespace

TEST_CASE("w32 boundary data reproduces w32") {
  SolveReport r = solve_w32(64);
  CHECK(r.converged);
  CHECK(r.complementarity_residual < 1e-6);
  double err = 0.0;
  for (std::size_t id : r.w.grid->active_nodes()) err = std::max(err, std::abs(r.w.v[id] - w32(r.w.grid->point(id), 2)));
  CHECK(err < 5e-3);
}

TEST_CASE("energy history never increases") {
  SolveReport r = solve_w32(32);
  for (std::size_t k = 1; k < r.energy_history.size(); ++k) CHECK(r.energy_history[k] <= r.energy_history[k - 1] + 1e-9);
}

TEST_CASE("zero data gives the zero solution") {
  ProblemSpec ps;
  ps.metric = std::make_shared<const MetricField>(make_identity(make(2, 32, true)));
  ps.dirichlet = [](const Vec&) { return 0.0; };
  SolveReport r = solve_psor(ps);
  for (double v : r.w.v) CHECK(v == 0.0);
}

TEST_CASE("solution stays above the obstacle") {
  ProblemSpec ps;
  ps.metric = std::make_shared<const MetricField>(make_perturbed(make(2, 32, true), 0.05, {1, 1, 1}, kInf));
  ps.dirichlet = [](const Vec& x) { return w32(x, 2); };
  SolveReport r = solve_psor(ps);
  for (std::size_t id : r.w.grid->plane_nodes()) CHECK(r.w.v[id] >= -1e-9);
}

TEST_CASE("mode and grid preconditions") {
  ProblemSpec ps;
  ps.metric = std::make_shared<const MetricField>(make_identity(make(2, 16, true)));
  ps.dirichlet = [](const Vec&) { return 0.0; };
  ps.mode = SolveMode::Interior;
  CHECK_THROWS_AS(solve_psor(ps), Error);
  ps.mode = SolveMode::BoundaryObstacle;
  CHECK_THROWS_AS(solve_psor(ps), Error);
  CHECK(parse_mode("interior") == SolveMode::Interior);
  CHECK_THROWS_AS(parse_mode("bogus"), Error);
}

TEST_CASE("flux jump of |x_{n+1}| is 2") {
  auto g = make(2, 32, false);
  Field w = sample(g, [](const Vec& x) { return std::abs(x[1]); });
  auto j = flux_jump(w);
  for (std::size_t id : g->plane_nodes())
    if (g->kind(id) == NodeKind::Interior) CHECK(j[id] == doctest::Approx(2.0));
}

TEST_CASE("interior normalization recovers the linear coefficient") {
  auto g = make(2, 128, false);
  Field w = sample(g, [](const Vec& x) { return w32(x, 2) + 0.3 * x[1]; });
  std::size_t x0 = g->nearest_node(Vec{0, 0, 0});
  InteriorNormalization n = normalize_interior(w, {x0}, x0);
  CHECK(n.b_tilde == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("interior obstacle solve with |x_{n+1}| data") {
  ProblemSpec ps;
  auto g = make(2, 32, false);
  ps.metric = std::make_shared<const MetricField>(make_identity(g));
  ps.mode = SolveMode::Interior;
  ps.dirichlet = [](const Vec& x) { return std::abs(x[1]); };
  SolveReport r = solve_psor(ps);
  CHECK(r.converged);
  CHECK(r.complementarity_residual <= 1e-6);
  auto j = flux_jump(r.w);
  for (std::size_t id : g->plane_nodes())
    if (g->kind(id) == NodeKind::Interior) CHECK(j[id] >= -1e-6);
}

TEST_CASE("obstacle subtraction with a zero obstacle is the identity") {
  auto g = make(2, 16, true);
  MetricField m = make_identity(g);
  Field w = sample(g, [](const Vec& x) { return x[0] * x[1]; });
  ObstacleReduction o = subtract_obstacle(w, [](const Vec&) { return 0.0; }, m);
  for (std::size_t id : g->active_nodes()) {
    CHECK(o.v.v[id] == doctest::Approx(w.v[id]));
    CHECK(o.f.v[id] == doctest::Approx(0.0));
  }
}
