#pragma once

#include "signorini/grid.hpp"
#include "signorini/metric.hpp"

namespace signorini {

enum class ProfileKind { W32, W12, W12Bar, W12Power };

ProfileKind parse_profile(const std::string& s);

// Model profiles in the (t1, t2) = (x_n, x_{n+1}) plane, without c_n. The
// branch cut of z^{1/2} sits on {t2 = 0, t1 < 0}; w32, w12 are even in t2.
double eval_profile(ProfileKind kind, double t1, double t2, double s = 0.0);

// c_n with ||c_n Re(x_n + i x_{n+1})^{3/2}||_{L2(B1+)} = 1, by quadrature.
double normalization_constant(int n);

// c_n-normalized w32 evaluated at a point of R^{n+1}.
double w32(const Vec& x, int dim);

struct AsymptoticFrame {
  Vec x0{0, 0, 0};
  Vec nu{0, 0, 0};
  Tensor A0{};
  double c1 = 1.0;
  double c2 = 1.0;
  int dim = 2;
};

// Builds the frame at x0 for a thin-plane unit normal nu and the tensor A(x0).
AsymptoticFrame make_frame(const Vec& x0, const Vec& nu, const Tensor& A0, int dim);

// Profile evaluated at (((x - x0).nu) / c1, x_{n+1} / c2).
double anisotropic_profile(ProfileKind kind, const Vec& x, const AsymptoticFrame& f, double s = 0.0);

}  // namespace signorini
