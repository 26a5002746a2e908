#pragma once

#include <functional>
#include <vector>

#include "signorini/grid.hpp"
#include "signorini/metric.hpp"
#include "signorini/profiles.hpp"

namespace signorini {

struct SlitSet {
  GridPtr grid;
  std::vector<std::size_t> lambda, omega, gamma;
  std::vector<std::uint8_t> in_lambda;  // per storage id, thin-plane nodes only
  std::vector<double> dist_gamma, dist_lambda;
  bool no_free_boundary = false;

  bool has_gamma() const { return !gamma.empty(); }
};

// Lambda = thin nodes with w - phi <= contact_tol; Gamma = Lambda nodes with an
// Omega neighbor along an in-plane axis.
SlitSet extract_sets(const Field& w, const Field* phi, double contact_tol);
// Synthetic slit from a predicate on thin-plane points.
SlitSet slit_from_predicate(GridPtr g, const std::function<bool(const Vec&)>& in_lambda);
// Same thin-plane pattern on another grid of identical mesh (half <-> full).
SlitSet transfer_slit(const SlitSet& s, GridPtr target);

struct GraphFit {
  int dim = 2;
  double h = 0.0;
  int side = 1;                 // Omega lies at x_n > g (+1) or x_n < g (-1)
  std::vector<double> xpp;      // column coordinate x'' (single 0 entry when n = 1)
  std::vector<double> g;        // sub-cell free boundary position per column
  std::vector<double> g_node;   // x_n of the Gamma node per column
  std::vector<double> g_smooth; // value of the local quadratic fit per column (n = 2)
  std::vector<double> grad_g;
  std::vector<std::size_t> gamma_node;
  double lipschitz = 0.0;
  double holder_alpha = 1.0;
  double holder_seminorm = 0.0;

  Vec point(std::size_t c) const;
  // Piecewise-linear curve through the column points, sampled at `spacing`;
  // `smoothed` uses the local quadratic fit values instead of the raw positions.
  std::vector<Vec> curve(double spacing, bool smoothed = false) const;
  // Outer normal of Lambda (pointing into Omega) at column c.
  Vec normal(std::size_t c) const;
  std::size_t column_near(const Vec& x) const;
};

// Fit window |x''| <= window. With w given, g is refined below the cell size
// by extrapolating w^{2/3} from the first two Omega nodes of each column.
// grad_g is the slope of a local quadratic fit over `smooth` columns per side.
GraphFit fit_graph(const SlitSet& slit, const Field* w, const Field* phi, double window = 0.5, int smooth = 4);

struct FlatnessEntry {
  Vec x0{0, 0, 0};
  double r = 0.0;
  double delta = 0.0;
  double angle = 0.0;  // minimizing line direction (n = 2)
  bool skipped = false;
};

struct FlatnessReport {
  std::vector<FlatnessEntry> entries;
  double worst_delta = 0.0;
  // Per center: least-squares slope of delta against ln r, and whether delta
  // does not grow as r decreases (slope >= -slack).
  std::vector<double> trend_slope;
  std::vector<std::uint8_t> trend_ok;
};

FlatnessReport reifenberg_delta(const std::vector<Vec>& gamma, const std::vector<Vec>& centers,
                                const std::vector<double>& scales, int dim, double h);

struct QuotientColumn {
  double xpp = 0.0;
  double limit = 0.0;      // fitted limit of d_e w / d_n w at Gamma
  double expected = 0.0;   // -d_j g from the graph fit
  double exponent = 0.0;   // empirical Hoelder exponent along the ray
  int samples = 0;
};

struct QuotientReport {
  std::vector<QuotientColumn> columns;
  double max_mismatch = 0.0;
  double median_exponent = 0.0;
};

// Quotient d_e w / d_n w sampled on rays x0 + t e_n into Omega, t in [2h, kmax h].
QuotientReport quotient_regularity(const Field& w, const GraphFit& gf, int axis_e, int kmax = 8);

// Frame at the column point closest to x0, normal from the graph gradient.
AsymptoticFrame frame_at(const Vec& x0, const MetricField& m, const GraphFit& gf);

}  // namespace signorini
