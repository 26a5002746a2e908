#include <doctest.h>

#include <cmath>

#include "signorini/metric.hpp"
#include "signorini/profiles.hpp"

using namespace signorini;

namespace {
GridPtr make(int dim, int inv, bool half) { return std::make_shared<const Grid>(GridSpec{dim, inv, half}); }
}  // namespace

TEST_CASE("identity metric satisfies every assumption with cstar 0") {
  auto g = make(2, 32, true);
  MetricField m = make_identity(g);
  AssumptionReport r = check_assumptions(m);
  CHECK(r.all_pass());
  CHECK(m.cstar() == 0.0);
  CHECK(gradient_lp_norm(m, 1.0, kInf) == 0.0);
}

TEST_CASE("perturbed metric: cstar is linear in the amplitude") {
  auto g = make(2, 32, true);
  MetricField a = make_perturbed(g, 0.02, {1, 1, 1}, kInf);
  MetricField b = make_perturbed(g, 0.04, {1, 1, 1}, kInf);
  REQUIRE(a.cstar() > 0.0);
  CHECK(b.cstar() / a.cstar() == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(check_assumptions(a).all_pass());
}

TEST_CASE("perturbed metric is symmetric and uniformly elliptic") {
  auto g = make(3, 16, true);
  MetricField m = make_perturbed(g, 0.05, {1, 2, 3}, 8.0);
  for (std::size_t id : g->active_nodes()) {
    Tensor A = m.tensor(id);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(A[i][j] == A[j][i]);
    auto ev = sym_eigenvalues(A, 3);
    CHECK(ev[0] > 0.5);
    CHECK(ev[2] < 2.0);
  }
}

TEST_CASE("constant metric interpolates to itself") {
  auto g = make(2, 16, true);
  Tensor A{{{1.2, 0.1, 0}, {0.1, 0.9, 0}, {0, 0, 1}}};
  MetricField m = make_constant(g, A);
  Tensor B = interpolate_tensor(m, Vec{0.3, 0.2, 0});
  CHECK(B[0][0] == doctest::Approx(1.2));
  CHECK(B[0][1] == doctest::Approx(0.1));
  CHECK(B[1][1] == doctest::Approx(0.9));
}

TEST_CASE("normalization constants match the closed forms") {
  // Half disc: integral of r^3 cos^2(3t/2) = pi/10. Half ball: pi^2/32.
  CHECK(normalization_constant(1) == doctest::Approx(std::sqrt(10.0 / M_PI)).epsilon(1e-8));
  CHECK(normalization_constant(2) == doctest::Approx(std::sqrt(32.0) / M_PI).epsilon(1e-8));
}

TEST_CASE("w32 vanishes on the contact half-line and is positive ahead of it") {
  for (double t : {-0.9, -0.5, -0.01}) CHECK(std::abs(eval_profile(ProfileKind::W32, t, 0.0)) < 1e-14);
  for (double t : {0.01, 0.5, 0.9}) CHECK(eval_profile(ProfileKind::W32, t, 0.0) == doctest::Approx(std::pow(t, 1.5)));
  CHECK(w32(Vec{0.25, 0.0, 0}, 2) == doctest::Approx(normalization_constant(1) * 0.125));
}

TEST_CASE("model profiles are harmonic away from the slit and homogeneous") {
  const double e = 1e-3;
  for (ProfileKind k : {ProfileKind::W32, ProfileKind::W12}) {
    double t1 = 0.3, t2 = 0.4;
    double lap = (eval_profile(k, t1 + e, t2) + eval_profile(k, t1 - e, t2) + eval_profile(k, t1, t2 + e) +
                  eval_profile(k, t1, t2 - e) - 4 * eval_profile(k, t1, t2)) /
                 (e * e);
    CHECK(std::abs(lap) < 1e-4);
  }
  CHECK(eval_profile(ProfileKind::W32, 0.6, 0.8) == doctest::Approx(8.0 * eval_profile(ProfileKind::W32, 0.15, 0.2)));
  CHECK(eval_profile(ProfileKind::W12, 0.6, 0.8) == doctest::Approx(2.0 * eval_profile(ProfileKind::W12, 0.15, 0.2)));
}

TEST_CASE("identity frame reduces the anisotropic profile to the plain one") {
  Tensor I{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  AsymptoticFrame f = make_frame(Vec{0, 0, 0}, Vec{1, 0, 0}, I, 2);
  CHECK(f.c1 == doctest::Approx(1.0));
  CHECK(f.c2 == doctest::Approx(1.0));
  CHECK(anisotropic_profile(ProfileKind::W32, Vec{0.3, 0.2, 0}, f) == doctest::Approx(eval_profile(ProfileKind::W32, 0.3, 0.2)));
}

TEST_CASE("parse_profile rejects unknown names") {
  CHECK(parse_profile("w32") == ProfileKind::W32);
  CHECK_THROWS_AS(parse_profile("w99"), Error);
}
