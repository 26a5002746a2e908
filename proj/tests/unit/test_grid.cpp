#include <doctest.h>

#include <cmath>

#include "signorini/grid.hpp"

using namespace signorini;

namespace {
GridPtr make(int dim, int inv, bool half) { return std::make_shared<const Grid>(GridSpec{dim, inv, half}); }
}  // namespace

TEST_CASE("half grid covers the closed upper half ball") {
  auto g = make(2, 8, true);
  CHECK(g->plane_nodes().size() == 17);
  for (std::size_t id : g->active_nodes()) {
    Vec x = g->point(id);
    CHECK(norm(x) <= 1.0 + 1e-12);
    CHECK(x[1] >= 0.0);
  }
  CHECK(g->h() == doctest::Approx(0.125));
}

TEST_CASE("full grid contains mirror pairs") {
  auto g = make(3, 8, false);
  for (std::size_t id : g->active_nodes()) {
    std::size_t r = g->reflect(id);
    Vec a = g->point(id), b = g->point(r);
    CHECK(a[2] == doctest::Approx(-b[2]));
    CHECK(a[0] == doctest::Approx(b[0]));
  }
}

TEST_CASE("parse_mesh accepts reciprocal integers") {
  GridSpec s = parse_mesh(2, 1.0 / 64, true);
  CHECK(s.inv_h == 64);
}

TEST_CASE("interpolation and gradients are exact on linear functions") {
  auto g = make(2, 16, true);
  Field f = sample(g, [](const Vec& x) { return 2.0 * x[0] - 0.5 * x[1] + 1.0; });
  CHECK(interpolate(f, Vec{0.1234, 0.321, 0}) == doctest::Approx(2.0 * 0.1234 - 0.5 * 0.321 + 1.0));
  std::size_t id = g->nearest_node(Vec{0.25, 0.25, 0});
  Vec gr = gradient(f, id);
  CHECK(gr[0] == doctest::Approx(2.0));
  CHECK(gr[1] == doctest::Approx(-0.5));
}

TEST_CASE("distance field matches brute force") {
  auto g = make(2, 16, true);
  std::vector<std::size_t> target = {g->nearest_node(Vec{0, 0, 0}), g->nearest_node(Vec{-0.5, 0, 0})};
  auto d = distance_field(*g, target);
  for (std::size_t id : g->active_nodes()) {
    double b = 1e9;
    for (std::size_t t : target) b = std::min(b, norm(sub(g->point(id), g->point(t))));
    CHECK(d[id] == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("hausdorff distance of shifted point sets") {
  std::vector<Vec> X = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  std::vector<Vec> Y = {{0, 0.25, 0}, {1, 0.25, 0}, {2, 0.25, 0}};
  CHECK(hausdorff_distance(X, X, 2) == 0.0);
  CHECK(hausdorff_distance(X, Y, 2) == doctest::Approx(0.25));
  std::vector<Vec> Z = {{0, 0, 0}};
  CHECK(hausdorff_distance(X, Z, 2) == doctest::Approx(2.0));
}

TEST_CASE("point locator nearest agrees with brute force") {
  std::vector<Vec> pts;
  for (int k = 0; k < 50; ++k) pts.push_back({std::cos(0.37 * k) * 0.7, std::sin(0.91 * k) * 0.6, 0});
  PointLocator loc(pts, 2);
  for (int q = 0; q < 20; ++q) {
    Vec x{std::sin(1.3 * q), std::cos(0.7 * q), 0};
    double b = 1e9;
    for (const Vec& p : pts) b = std::min(b, norm(sub(x, p)));
    CHECK(loc.distance(x) == doctest::Approx(b));
  }
}

TEST_CASE("cone membership") {
  Cone c{{1, 0, 0}, 0.5, false};
  CHECK(cone_membership(Vec{1, 0.1, 0}, Vec{0, 0, 0}, c, 2));
  CHECK_FALSE(cone_membership(Vec{-1, 0.1, 0}, Vec{0, 0, 0}, c, 2));
}

TEST_CASE("ball norm of a constant equals sqrt of the half-disc area") {
  auto g = make(2, 128, true);
  Field one = sample(g, [](const Vec&) { return 1.0; });
  double r = 0.5;
  CHECK(ball_norm(one, Vec{0, 0, 0}, r) == doctest::Approx(std::sqrt(M_PI * r * r / 2)).epsilon(0.02));
}
