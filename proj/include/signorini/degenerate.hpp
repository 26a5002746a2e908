#pragma once

#include <array>
#include <memory>
#include <vector>

#include "signorini/free_boundary.hpp"
#include "signorini/grid.hpp"
#include "signorini/metric.hpp"
#include "signorini/solver.hpp"

namespace signorini {

// K = 16 (sigma + 1).
double default_potential(double sigma);

// d_i a^{ij} d_j u - K dist(x, Gamma)^{-2} u = d_i F^i + g on the full ball
// minus Lambda, u = 0 on Lambda and on the outer boundary. dist is floored at h/2.
struct SplitProblem {
  std::shared_ptr<const MetricField> metric;  // full-grid metric
  SlitSet slit;                               // on the same full grid
  double K = 0.0;                             // <= 0 selects default_potential(sigma)
  double sigma = 0.0;
  double p = kInf;
  std::array<std::vector<double>, 3> F;  // nodal F^i per storage id; empty means 0
  std::vector<double> g;                 // nodal g; empty means 0
};

struct DegenerateSolution {
  Field u;
  double K = 0.0;
  double residual = 0.0;  // max |A u - b| / max(|b|, tiny) over unknowns
  std::size_t unknowns = 0;
};

DegenerateSolution solve_degenerate(const SplitProblem& sp);

// Discrete left-hand side d_i a^{ij} d_j u - K dist^{-2} u at the unknown nodes
// (0 elsewhere); manufactured right-hand sides for tests come from here.
std::vector<double> apply_degenerate(const SplitProblem& sp, const Field& u);

// Even (parity 1) or odd (parity -1) extension of a half-grid field.
Field reflect_to_full(const Field& half, GridPtr full, int parity = 1);

// Central difference along an axis on a full grid (0 off the operator rows).
std::vector<double> central_derivative(const Field& f, int axis);

struct SplitPair {
  Field u_main;  // v2, or u in the solution splitting
  Field u_err;   // v1, or u~
  double K = 0.0;
  double err_ratio = 0.0;    // max |u_err| / max |reference| over the upper half of B_{1/2}
  double bound_ratio = 0.0;  // solution splitting: sup |u~| / (dist(Lambda) dist(Gamma)^{1-(n+1)/p})
  double lower_ratio = 0.0;  // solution splitting: cone min of d_n u / (dist(Lambda) dist(Gamma)^{-1/2})
  double residual = 0.0;
};

// v1 from F^i = -(d_e a^{ij}) d_j w, v2 = d_e w - v1, on the reflected ball.
SplitPair split_tangential_derivative(const Field& w_half, const MetricField& m_half, const SlitSet& slit_half,
                                      int axis_e, double K, double sigma = 0.0);

// a^{ij} d_ij u~ - dist^{-2} u~ = f - (d_i a^{ij}) d_j w, u = w - u~.
SplitPair split_solution(const Field& w_half, const MetricField& m_half, const SlitSet& slit_half,
                         const ScalarFn& f, double ell0 = -1.0);

struct DecayFit {
  double slope = 0.0;
  double r2 = 0.0;
  std::vector<double> dist, value;
};

// log |u| against log dist(x, Gamma) on the lattice ray x0 + k h (e_n + e_{n+1}),
// keeping samples with dist in [dmin, dmax]. x0 is snapped to the nearest node.
DecayFit ray_decay(const Field& u, const SlitSet& slit, const Vec& x0, double dmin, double dmax);

}  // namespace signorini
