#pragma once

#include <vector>

#include "signorini/free_boundary.hpp"
#include "signorini/grid.hpp"
#include "signorini/profiles.hpp"

namespace signorini {

// Radii rmax, rmax/ratio, ... down to rmin (inclusive within rounding).
std::vector<double> geometric_radii(double rmin, double rmax, double ratio = 2.0);

struct VanishingOrderEstimate {
  Vec x0{0, 0, 0};
  double kappa = 0.0;
  double r2 = 0.0;
  bool infinite = false;
  bool trusted = false;  // r2 >= 0.95
  std::vector<double> radii, norms;
};

// Default radii: dyadic in [4h, min(1/4, (1-|x0|)/2)].
VanishingOrderEstimate vanishing_order(const Field& w, const Vec& x0, std::vector<double> radii = {});

struct BlowupField {
  Vec x0{0, 0, 0};
  double r = 0.0;
  double scale = 0.0;  // r^{-(n+1)/2} ||w||_{L2(B_r+(x0))}
  Field w_r;
};

BlowupField blowup(const Field& w, const Vec& x0, double r, int unit_inv_h);

struct ModelDistance {
  double distance = 0.0;  // sup |w_r - m| + sup |grad w_r - grad m|
  Vec nu{0, 0, 0};
  double angle_deg = 0.0;
};

// C1 distance of the blow-up at (x0, r) to the best thin-plane rotation of the
// c_n-normalized w32, over the 1-degree normal grid (n = 2) or the two
// orientations (n = 1). Evaluated on the native lattice {(x - x0) / r} of grid
// nodes in the upper half of B_{r(1-margin)}(x0), with model gradients taken by
// the same difference formulas, so no interpolation error enters.
ModelDistance c1_distance_to_model(const Field& w, const Vec& x0, double r, double margin = 0.05);

struct ExpansionOptions {
  double radius = 0.125;
  double rho_min_cells = 3.0;
  int n_radii = 24;
  int n_angles = 25;
  bool higher_order = true;  // fit degree-5/2 (and 3/2 for derivatives) nuisance terms jointly
  bool interior = false;     // fit the constant b~ in the d_{n+1} w expansion
  int recenter_iterations = 4;  // 0 keeps the given center
  double kappa_lo = 1.4;
  double kappa_hi = 1.6;
};

struct ExpansionFit {
  AsymptoticFrame frame;
  double kappa = 0.0;
  double a = 0.0;
  double b_nu = 0.0;
  double b_np1 = 0.0;
  double b_tilde = 0.0;
  std::vector<Vec> dirs;
  std::vector<double> b_e;
  double center_shift = 0.0;  // |frame.x0 - given x0| after re-centering
  // Slope of log max|w - leading term| against log rho over shells at least 3x
  // above the smallest shell residual; +inf when fewer than 4 such shells exist.
  double residual_exponent = 0.0;
  double residual_r2 = 0.0;
  double residual_floor = 0.0;
  int residual_shells = 0;
  std::vector<double> shell_radii, shell_residual;  // max |w - leading term| per sampling radius
};

ExpansionFit fit_expansion(const Field& w, const Vec& x0, const AsymptoticFrame& frame, double kappa,
                           const ExpansionOptions& opt = {});

struct CompatibilityReport {
  double curl_defect = 0.0;  // |b_nu c1 - b_{n+1} c2| / max(...)
  double defa_defect = 0.0;  // |a - 2 b_{n+1} c2 / 3| / |a|
  std::vector<double> direction_defects;
};

CompatibilityReport check_compatibility(const ExpansionFit& fit);

struct GrowthReport {
  Vec x0{0, 0, 0};
  std::vector<double> radii, sup_w, sup_grad;
  double slope_w = 0.0, r2_w = 0.0;
  double slope_grad = 0.0, r2_grad = 0.0;
  double cone_lower_ratio = 0.0;
};

struct GrowthOptions {
  double rmin_cells = 8.0;
  double rmax = 0.25;
  double ratio = 2.0;
  double ell0 = -1.0;  // <= 0 selects (2^4 sqrt(n))^{-1}
};

std::vector<GrowthReport> growth_exponents(const Field& w, const SlitSet& slit, const GraphFit* gf,
                                           const std::vector<Vec>& centers, const GrowthOptions& opt = {});

// max |grad w(x) - grad w(y)| / |x - y|^exponent over node pairs in the upper
// half of B_radius(center) with |x - y| in [band_lo, band_hi] (band_lo >= 4h).
double holder_seminorm_gradient(const Field& w, const Vec& center, double radius, double exponent,
                                double band_lo = 0.0, double band_hi = 1e9);

}  // namespace signorini
