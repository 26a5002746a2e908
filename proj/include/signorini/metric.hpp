#pragma once

#include <array>
#include <limits>
#include <string>
#include <vector>

#include "signorini/grid.hpp"

namespace signorini {

using Tensor = std::array<std::array<double, 3>, 3>;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Parameters of the synthetic trigonometric generator.
struct MetricGenerator {
  double amplitude = 0.0;
  Vec wavevector{0, 0, 0};
  double p = kInf;

  Tensor eval(const Vec& x, int dim) const;
};

// Symmetric tensor field sampled at grid nodes, packed upper triangle.
class MetricField {
 public:
  MetricField() = default;
  MetricField(GridPtr grid, double p);

  const GridPtr& grid() const { return grid_; }
  int dim() const { return grid_->dim(); }
  double p() const { return p_; }
  double cstar() const { return cstar_; }
  bool generated() const { return generated_; }
  const MetricGenerator& generator() const { return gen_; }

  static int comp(int i, int j, int dim);
  static int ncomp(int dim) { return dim * (dim + 1) / 2; }

  double get(std::size_t id, int i, int j) const { return a_[id * nc_ + comp(i, j, grid_->dim())]; }
  void set(std::size_t id, int i, int j, double v) { a_[id * nc_ + comp(i, j, grid_->dim())] = v; }
  Tensor tensor(std::size_t id) const;
  // Tensor at a multi-index, applying the even/odd mirror below the plane on half grids.
  Tensor tensor_at(const Idx& i) const;
  // Component at a multi-index with mirror parity.
  double component_at(const Idx& i, int r, int c) const;

  const std::vector<double>& raw() const { return a_; }
  std::vector<double>& raw() { return a_; }

  void set_cstar(double c) { cstar_ = c; }
  void set_generator(const MetricGenerator& g) {
    gen_ = g;
    generated_ = true;
  }

 private:
  GridPtr grid_;
  int nc_ = 0;
  double p_ = kInf;
  double cstar_ = 0.0;
  bool generated_ = false;
  MetricGenerator gen_;
  std::vector<double> a_;
};

MetricField make_identity(GridPtr grid);
MetricField make_perturbed(GridPtr grid, double amplitude, const Vec& wavevector, double p);
MetricField make_from_generator(GridPtr grid, const MetricGenerator& gen);
// Constant tensor (testing aid); rejects tensors outside the ellipticity window.
MetricField make_constant(GridPtr grid, const Tensor& A);

// max_ij || |grad a^{ij}| ||_{L^p(B_radius)} over the full ball, central
// differences and nodal midpoint quadrature; p = inf gives the max norm.
double gradient_lp_norm(const MetricField& m, double radius, double p);

struct AssumptionCheck {
  std::string name;
  bool pass = true;
  double worst = 0.0;
  Vec worst_point{0, 0, 0};
  std::string detail;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;
  // max |a^{ij}(x) - delta^{ij}| / (cstar |x|^{1-(n+1)/p}); the Morrey
  // constant is not explicit so only the empirical ratio is reported.
  double morrey_ratio = 0.0;
  bool all_pass() const;
};

AssumptionReport check_assumptions(const MetricField& m);

// (A0): L2 norm of w over the upper half ball; 1 for a normalized solution.
double solution_l2_norm(const Field& w);

// Half-ball metric to the full ball: even reflection of a^{ij} (i,j <= n) and
// a^{n+1,n+1}, odd reflection of a^{n+1,j}.
MetricField reflect_extend(const MetricField& m, GridPtr full);
// Injection onto a coarser grid whose nodes are fine-grid nodes.
MetricField restrict_to(const MetricField& m, GridPtr coarse);

// Multilinear interpolation of the tensor at an arbitrary point.
Tensor interpolate_tensor(const MetricField& m, const Vec& x);

// Eigenvalues of a symmetric tensor (ascending, first dim entries valid).
std::array<double, 3> sym_eigenvalues(const Tensor& A, int dim);

}  // namespace signorini
