#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "signorini/free_boundary.hpp"
#include "signorini/grid.hpp"
#include "signorini/metric.hpp"

namespace signorini {

// Dyadic cube of [-1, 1]^{n+1}: level L has side 2^{1-L}, integer corner index key.
struct WhitneyCube {
  int level = 0;
  Idx key{0, 0, 0};
  Vec center{0, 0, 0};
  double side = 0.0;
  double diam = 0.0;
  double dist = 0.0;         // dist(Q, Gamma)
  Vec projection{0, 0, 0};   // Gamma point nearest to the center
  Vec normal{0, 0, 0};       // approximate normal, in the thin plane, pointing into Omega
  Vec anchor{0, 0, 0};       // projection onto the fitted plane; chart origin
  double fit_radius = 0.0;   // plane-fit ball radius min(64 diam, 1)
  bool clamped = false;      // 64 diam > 1, or the fit ball reaches past the unit sphere
  double flatness = 0.0;     // max distance of Gamma points in the fit ball to the fit plane / radius
};

struct WhitneyDecomposition {
  int dim = 2;
  double h = 0.0;
  int max_level = 0;
  std::vector<WhitneyCube> cubes;
  std::vector<std::vector<std::uint32_t>> neighbors;  // touching cubes
  std::vector<Vec> gamma;
  bool has_normals = false;

  // Index of a cube containing x, or -1 when x lies in the uncovered band around Gamma.
  int locate(const Vec& x) const;
  int find(int level, const Idx& key) const;

  std::unordered_map<std::uint64_t, std::uint32_t> lookup;
};

// Maximal dyadic cubes with diam(Q) <= dist(Q, Gamma) meeting B_1, down to side
// min_side (default h). Normals are not yet assigned.
WhitneyDecomposition whitney_decompose(const SlitSet& slit, double min_side = -1.0);

struct WhitneyCheck {
  double w1_min = 0.0;  // min dist(Q, Gamma) / diam(Q)
  double w1_max = 0.0;  // max dist(Q, Gamma) / diam(Q)
  double w2_min = 0.0;  // min diameter ratio over touching pairs
  double w2_max = 0.0;
  int max_touching = 0;
  int touching_bound = 0;  // 12^{n+1}
  bool symmetric = false;
  std::size_t cubes = 0;
  bool pass() const;
};

WhitneyCheck check_whitney(const WhitneyDecomposition& wd);

struct NormalCertificate {
  double max_jump = 0.0;     // max |nu_j - nu_k| over touching pairs
  double certificate = 0.0;  // max |nu_j - nu_k| / max(flatness_j, flatness_k)
  double max_flatness = 0.0;
  int clamped = 0;
};

// Total-least-squares plane of Gamma in B_{64 diam}(x_j), oriented toward Omega.
NormalCertificate approximate_normals(WhitneyDecomposition& wd, const SlitSet& slit);

// Smooth bump equal to 1 on (1/2)Q and vanishing outside (9/8)Q.
double cube_bump(const WhitneyCube& q, const Vec& x, int dim);

// Normalized partition-of-unity weights at x (cube index, eta). Uncovered points
// get the nearest cube with weight 1; `covered` reports which case applied.
std::vector<std::pair<std::uint32_t, double>> partition_weights(const WhitneyDecomposition& wd, const Vec& x,
                                                                bool* covered = nullptr);

enum class BarrierKind { HMinusS, HZero };

BarrierKind parse_barrier_kind(const std::string& s);
const char* to_string(BarrierKind k);

// Chart T(x) = M (x - x0) with M A(x0) M^t = I; M maps nu to c1^{-1} e_n and
// e_{n+1} to c2^{-1} e_{n+1}.
struct BarrierChart {
  Vec x0{0, 0, 0};
  Vec nu{0, 0, 0};
  double c1 = 1.0, c2 = 1.0;
  Tensor M{};
  Vec apply(const Vec& x, int dim) const;
};

BarrierChart make_chart(const Vec& x0, const Vec& nu, const Tensor& A, int dim);

struct BarrierField {
  BarrierKind kind = BarrierKind::HMinusS;
  double s = 0.0;
  Field values;  // h^-_s = h^- + q, or h_0
  Field blend;   // sum_k eta_k v_k before the correction
  Field q;       // divergence correction (zero for h_0)
  std::vector<BarrierChart> charts;
  double K = 0.0;
  double q_residual = 0.0;
  std::size_t uncovered = 0;     // nodes outside every cube
  double partition_defect = 0.0; // max |sum eta - 1| over covered nodes
};

// The metric and slit live on the full ball grid. K <= 0 selects default_potential(0).
BarrierField build_barrier(BarrierKind kind, double s, const WhitneyDecomposition& wd, const MetricField& m,
                           const SlitSet& slit, double K = -1.0);

struct BarrierReport {
  double s = 0.0;
  double dmin = 0.0;               // sampling band: dist(x, Gamma) >= dmin
  std::size_t samples = 0;
  double min_weighted_L = 0.0;     // min L h dist^{3/2 - s/2}
  double max_weighted_L = 0.0;
  Vec argmin{0, 0, 0};
  double closed_form_min = 0.0;    // s(1+s)/4, the flat identity value of the same minimum
  double cone_min = 0.0;           // min h / dist^{1/2 + s/2} on {dist(Lambda) >= ell0 dist(Gamma)}
  double global_lower = 0.0;       // min h / dist^{3/2 - (n+1)/p} (>= -C)
  double lambda_max_abs = 0.0;     // max |h| on Lambda
  double g1_norm = 0.0;            // ||dist^{1/2} g1||_{L^p}, g1 = (d_i a^{ij}) d_j h
  double g2_norm = 0.0;            // ||dist^{3/2 - min(alpha, 1-(n+1)/p)} g2||_inf, g2 = L h - g1
};

BarrierReport verify_barrier(const BarrierField& b, const MetricField& m, const SlitSet& slit, double dmin_cells = 3.0,
                             double ell0 = -1.0, double alpha = 1.0);

void write_whitney_csv(const WhitneyDecomposition& wd, const std::string& path);

}  // namespace signorini
