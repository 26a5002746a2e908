#include <doctest.h>

#include <cmath>

#include "signorini/metric.hpp"
#include "signorini/profiles.hpp"
#include "signorini/whitney.hpp"

using namespace signorini;

namespace {
GridPtr make(int dim, int inv, bool half) { return std::make_shared<const Grid>(GridSpec{dim, inv, half}); }

SlitSet flat_slit(GridPtr g) {
  const int d = g->dim();
  return slit_from_predicate(g, [d](const Vec& x) { return x[d - 2] <= 1e-12; });
}
}  // namespace

TEST_CASE("whitney cubes satisfy the separation, neighbor and overlap conditions") {
  for (int dim : {2, 3}) {
    auto g = make(dim, dim == 2 ? 64 : 16, false);
    SlitSet s = flat_slit(g);
    WhitneyDecomposition wd = whitney_decompose(s);
    WhitneyCheck c = check_whitney(wd);
    CHECK(c.pass());
    CHECK(c.w1_min >= 1.0);
    CHECK(c.w1_max <= 4.0 + 1e-12);
    CHECK(c.w2_min >= 0.25 - 1e-12);
    CHECK(c.w2_max <= 4.0 + 1e-12);
    CHECK(c.max_touching <= c.touching_bound);
    CHECK(c.symmetric);
  }
}

TEST_CASE("every cube center is located in its own cube") {
  auto g = make(2, 64, false);
  WhitneyDecomposition wd = whitney_decompose(flat_slit(g));
  for (std::size_t k = 0; k < wd.cubes.size(); ++k) CHECK(wd.locate(wd.cubes[k].center) == static_cast<int>(k));
}

TEST_CASE("flat slit normals are e_n with a zero certificate") {
  auto g = make(3, 16, false);
  SlitSet s = flat_slit(g);
  WhitneyDecomposition wd = whitney_decompose(s);
  NormalCertificate nc = approximate_normals(wd, s);
  for (const auto& q : wd.cubes) {
    CHECK(q.normal[1] == doctest::Approx(1.0));
    CHECK(std::abs(q.normal[2]) < 1e-12);
  }
  CHECK(nc.max_jump < 1e-12);
}

TEST_CASE("tilted slit normals follow the plane") {
  auto g = make(3, 32, false);
  SlitSet s = slit_from_predicate(g, [](const Vec& x) { return x[1] + 0.3 * x[0] <= 0; });
  WhitneyDecomposition wd = whitney_decompose(s);
  approximate_normals(wd, s);
  const Vec nu{0.3 / std::sqrt(1.09), 1.0 / std::sqrt(1.09), 0};
  int checked = 0;
  for (const auto& q : wd.cubes) {
    // A plane is fit exactly whatever the fit radius, so clamped cubes count too.
    if (norm(q.center) > 0.5) continue;
    CHECK(std::abs(dot(q.normal, nu)) > 0.99);
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("partition of unity sums to one on covered points") {
  auto g = make(2, 64, false);
  WhitneyDecomposition wd = whitney_decompose(flat_slit(g));
  for (std::size_t id : g->active_nodes()) {
    bool covered = false;
    auto w = partition_weights(wd, g->point(id), &covered);
    double sum = 0.0;
    for (auto& [k, eta] : w) sum += eta;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("bump equals one on the half cube and vanishes outside 9/8 of it") {
  WhitneyCube q;
  q.center = {0.5, 0.5, 0};
  q.side = 0.25;
  CHECK(cube_bump(q, Vec{0.5 + 0.06, 0.5 - 0.06, 0}, 2) == 1.0);
  CHECK(cube_bump(q, Vec{0.5 + 0.15, 0.5, 0}, 2) == 0.0);
  double mid = cube_bump(q, Vec{0.5 + 0.1, 0.5, 0}, 2);
  CHECK(mid > 0.0);
  CHECK(mid < 1.0);
}

TEST_CASE("chart normalizes the metric and scales the normal coordinate") {
  Tensor A{{{1.3, 0.2, 0.1}, {0.2, 0.9, 0.05}, {0.1, 0.05, 1.1}}};
  Vec nu{0.6, 0.8, 0};
  Vec x0{0.1, -0.2, 0};
  BarrierChart c = make_chart(x0, nu, A, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) s += c.M[i][k] * A[k][l] * c.M[j][l];
      CHECK(s == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10).scale(1.0));
    }
  Vec x{0.4, 0.3, 0.2};
  Vec y = c.apply(x, 3);
  CHECK(y[1] == doctest::Approx(dot(nu, sub(x, x0)) / c.c1));
  CHECK(parse_barrier_kind("h_zero") == BarrierKind::HZero);
  CHECK_THROWS_AS(parse_barrier_kind("h_plus"), Error);
}

TEST_CASE("flat identity barrier equals the single closed-form chart") {
  auto g = make(2, 64, false);
  SlitSet s = flat_slit(g);
  WhitneyDecomposition wd = whitney_decompose(s);
  approximate_normals(wd, s);
  MetricField m = make_identity(g);
  const double sp = 0.25;
  BarrierField b = build_barrier(BarrierKind::HMinusS, sp, wd, m, s);
  double dev = 0.0;
  for (std::size_t id : g->active_nodes()) {
    Vec x = g->point(id);
    dev = std::max(dev, std::abs(b.values.v[id] - eval_profile(ProfileKind::W12Power, x[0], x[1], sp)));
  }
  CHECK(dev <= 1e-6);
  BarrierReport r = verify_barrier(b, m, s);
  CHECK(r.lambda_max_abs == 0.0);
  CHECK(r.closed_form_min == doctest::Approx(sp * (1 + sp) / 4));

  // On the diagonal ray the ratio h / dist^{(1+s)/2} is cos(pi/8)^{1+s}.
  for (int k = 4; k < 20; ++k) {
    std::size_t id = g->nearest_node(Vec{k * g->h(), k * g->h(), 0});
    double d = norm(g->point(id));
    CHECK(b.values.v[id] / std::pow(d, 0.5 * (1 + sp)) == doctest::Approx(std::pow(std::cos(M_PI / 8), 1 + sp)).epsilon(1e-9));
  }
}

TEST_CASE("h_zero vanishes on the contact set") {
  auto g = make(2, 64, false);
  SlitSet s = flat_slit(g);
  WhitneyDecomposition wd = whitney_decompose(s);
  approximate_normals(wd, s);
  MetricField m = make_perturbed(g, 0.05, {1, 1, 1}, kInf);
  BarrierField b = build_barrier(BarrierKind::HZero, 0.25, wd, m, s);
  for (std::size_t id : s.lambda) CHECK(b.values.v[id] == 0.0);
}
