#include "signorini/profiles.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <mutex>

namespace signorini {

ProfileKind parse_profile(const std::string& s) {
  if (s == "w32") return ProfileKind::W32;
  if (s == "w12") return ProfileKind::W12;
  if (s == "w12bar") return ProfileKind::W12Bar;
  if (s == "w12_power") return ProfileKind::W12Power;
  fail(ErrorCode::InvalidArgument, "unknown profile kind '" + s + "'");
}

double eval_profile(ProfileKind kind, double t1, double t2, double s) {
  const double r = std::hypot(t1, t2);
  if (r == 0.0) return 0.0;
  const double th = std::atan2(std::abs(t2), t1);  // [0, pi]
  switch (kind) {
    case ProfileKind::W32: return std::pow(r, 1.5) * std::cos(1.5 * th);
    case ProfileKind::W12: return std::sqrt(r) * std::cos(0.5 * th);
    case ProfileKind::W12Bar: return -std::sqrt(r) * std::sin(0.5 * std::atan2(t2, t1));
    case ProfileKind::W12Power: {
      double v = std::sqrt(r) * std::cos(0.5 * th);
      return v <= 0.0 ? 0.0 : std::pow(v, 1.0 + s);
    }
  }
  return 0.0;
}

namespace {

double l2_squared(int n) {
  using boost::math::quadrature::gauss_kronrod;
  auto ang = [](double th) {
    double c = std::cos(1.5 * th);
    return c * c;
  };
  double A = gauss_kronrod<double, 61>::integrate(ang, 0.0, M_PI, 15, 1e-14);
  if (n == 1) {
    auto rad = [](double r) { return r * r * r * r; };
    return A * gauss_kronrod<double, 61>::integrate(rad, 0.0, 1.0, 15, 1e-14);
  }
  // x''-invariant profile: integrate over the half disc rho < 1 with chord
  // length 2 sqrt(1 - rho^2); rho = sin(phi) removes the endpoint singularity.
  auto rad = [](double phi) {
    double r = std::sin(phi), c = std::cos(phi);
    return std::pow(r, 4) * 2.0 * c * c;
  };
  return A * gauss_kronrod<double, 61>::integrate(rad, 0.0, M_PI / 2, 15, 1e-14);
}

}  // namespace

double normalization_constant(int n) {
  require(n == 1 || n == 2, ErrorCode::InvalidArgument, "normalization_constant: n must be 1 or 2");
  static std::once_flag once[2];
  static double cache[2] = {0.0, 0.0};
  std::call_once(once[n - 1], [n] { cache[n - 1] = 1.0 / std::sqrt(l2_squared(n)); });
  return cache[n - 1];
}

double w32(const Vec& x, int dim) {
  return normalization_constant(dim - 1) * eval_profile(ProfileKind::W32, x[dim - 2], x[dim - 1]);
}

AsymptoticFrame make_frame(const Vec& x0, const Vec& nu, const Tensor& A0, int dim) {
  const int na = dim - 1;
  double nn = norm(nu);
  require(nn > 0.0 && std::abs(nu[na]) < 1e-12, ErrorCode::InvalidArgument, "frame normal must lie in the thin plane");
  AsymptoticFrame f;
  f.x0 = x0;
  f.nu = scale(nu, 1.0 / nn);
  f.A0 = A0;
  f.dim = dim;
  double q = 0.0;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) q += f.nu[i] * A0[i][j] * f.nu[j];
  require(q > 0.0 && A0[na][na] > 0.0, ErrorCode::Numerical, "frame tensor is not elliptic");
  f.c1 = std::sqrt(q);
  f.c2 = std::sqrt(A0[na][na]);
  return f;
}

double anisotropic_profile(ProfileKind kind, const Vec& x, const AsymptoticFrame& f, double s) {
  const int na = f.dim - 1;
  double t1 = dot(sub(x, f.x0), f.nu) / f.c1;
  double t2 = x[na] / f.c2;
  return eval_profile(kind, t1, t2, s);
}

}  // namespace signorini
