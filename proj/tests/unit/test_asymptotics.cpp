#include <doctest.h>

#include <cmath>

#include "signorini/asymptotics.hpp"
#include "signorini/metric.hpp"
#include "signorini/profiles.hpp"

using namespace signorini;

namespace {
GridPtr make(int dim, int inv, bool half) { return std::make_shared<const Grid>(GridSpec{dim, inv, half}); }
const Tensor kI{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
}  // namespace

TEST_CASE("geometric radii halve from rmax down to rmin") {
  auto r = geometric_radii(1.0 / 32, 0.25);
  REQUIRE(r.size() == 4);
  CHECK(r.front() == doctest::Approx(0.25));
  CHECK(r.back() == doctest::Approx(1.0 / 32));
}

TEST_CASE("vanishing orders of the analytic oracles") {
  auto g = make(2, 256, true);
  VanishingOrderEstimate a = vanishing_order(sample(g, [](const Vec& x) { return w32(x, 2); }), Vec{0, 0, 0});
  CHECK(a.kappa >= 1.45);
  CHECK(a.kappa <= 1.55);
  CHECK(a.r2 >= 0.99);
  VanishingOrderEstimate b = vanishing_order(sample(g, [](const Vec& x) { return x[0] * x[0] - x[1] * x[1]; }), Vec{0, 0, 0});
  CHECK(b.kappa >= 1.97);
  CHECK(b.kappa <= 2.03);
  VanishingOrderEstimate z = vanishing_order(Field(g), Vec{0, 0, 0});
  CHECK(z.infinite);
}

TEST_CASE("expansion fit of w32 returns the model coefficients") {
  auto g = make(2, 256, true);
  Field w = sample(g, [](const Vec& x) { return w32(x, 2); });
  AsymptoticFrame fr = make_frame(Vec{0, 0, 0}, Vec{1, 0, 0}, kI, 2);
  ExpansionFit fit = fit_expansion(w, Vec{0, 0, 0}, fr, 1.5);
  CHECK(fit.a == doctest::Approx(1.0).epsilon(0.01));
  CHECK(fit.b_np1 == doctest::Approx(1.5).epsilon(0.01));
  CompatibilityReport c = check_compatibility(fit);
  CHECK(c.curl_defect <= 0.05);
  CHECK(c.defa_defect <= 0.05);
}

TEST_CASE("expansion fit extracts the interior linear coefficient") {
  auto g = make(2, 128, false);
  Field w = sample(g, [](const Vec& x) { return w32(x, 2) + 0.3 * x[1]; });
  AsymptoticFrame fr = make_frame(Vec{0, 0, 0}, Vec{1, 0, 0}, kI, 2);
  ExpansionOptions eo;
  eo.interior = true;
  ExpansionFit fit = fit_expansion(w, Vec{0, 0, 0}, fr, 1.5, eo);
  CHECK(fit.b_tilde == doctest::Approx(0.3).epsilon(0.05));
}

TEST_CASE("growth exponents of w32") {
  auto g = make(2, 256, true);
  Field w = sample(g, [](const Vec& x) { return w32(x, 2); });
  SlitSet s = extract_sets(w, nullptr, 1e-12);
  auto gr = growth_exponents(w, s, nullptr, {Vec{0, 0, 0}});
  REQUIRE(gr.size() == 1);
  CHECK(gr[0].slope_w == doctest::Approx(1.5).epsilon(0.03));
  CHECK(gr[0].slope_grad == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("blow-ups of w32 are close to the model") {
  auto g = make(2, 256, true);
  Field w = sample(g, [](const Vec& x) { return w32(x, 2); });
  // Residual comes from lattice sampling of the normalized blow-up.
  for (double r : {0.25, 0.125}) CHECK(c1_distance_to_model(w, Vec{0, 0, 0}, r).distance < 0.05);
}

TEST_CASE("hoelder seminorm of a linear field vanishes") {
  auto g = make(2, 64, true);
  Field w = sample(g, [](const Vec& x) { return 0.7 * x[0] + 0.2 * x[1]; });
  CHECK(holder_seminorm_gradient(w, Vec{0, 0, 0}, 0.5, 0.5) < 1e-10);
}
