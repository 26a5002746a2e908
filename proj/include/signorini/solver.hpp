#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "signorini/grid.hpp"
#include "signorini/metric.hpp"

namespace signorini {

using ScalarFn = std::function<double(const Vec&)>;

// Divergence-form stencil A = -div(a grad .) restricted to the unknown nodes.
// Unknowns are active nodes whose whole 3^d neighborhood is active; the
// remaining active nodes carry Dirichlet values. On half grids the rows of
// plane nodes fold the mirrored lower neighbors onto the upper ones.
struct DiscreteOperator {
  GridPtr grid;
  std::vector<std::ptrdiff_t> offsets;
  std::vector<std::size_t> rows;
  std::vector<double> diag;
  std::vector<double> coef;          // rows.size() * offsets.size()
  std::vector<std::uint8_t> plane;   // row lies on the thin plane
  std::vector<std::int32_t> row_of;  // storage id -> row, -1 for Dirichlet nodes

  std::size_t stencil() const { return offsets.size(); }
  // (A w)_r using nodal values w (Dirichlet values included).
  double apply(std::size_t r, const std::vector<double>& w) const;
};

DiscreteOperator assemble_operator(const MetricField& m);

enum class SolveMode { BoundaryZero, BoundaryObstacle, Interior };

SolveMode parse_mode(const std::string& s);
const char* to_string(SolveMode m);

struct SolverParams {
  double omega = 0.0;  // <= 0 selects the Jacobi-spectral estimate
  double tol = 1e-8;
  long max_sweeps = 200000;
  int check_every = 10;
  int continuation = 0;  // number of coarse levels for the initial guess
  bool reverse_order = false;
};

struct ProblemSpec {
  std::shared_ptr<const MetricField> metric;
  SolveMode mode = SolveMode::BoundaryZero;
  ScalarFn dirichlet;
  ScalarFn phi;  // thin-plane obstacle, evaluated at (x', 0); empty means 0
  ScalarFn f;    // right-hand side of d_i a^{ij} d_j w = f; empty means 0
  double q = kInf;
  SolverParams params;
  const Field* initial = nullptr;
};

struct SolveReport {
  Field w;
  Field phi;  // obstacle values on the thin plane
  long sweeps = 0;
  bool converged = false;
  double pde_residual = 0.0;
  double complementarity_residual = 0.0;
  double energy = 0.0;
  double omega = 0.0;
  double seconds = 0.0;
  std::vector<double> energy_history;
};

SolveReport solve_psor(const ProblemSpec& spec);

double default_omega(const Grid& g);

struct Residuals {
  double pde = 0.0;
  double complementarity = 0.0;
};

Residuals residuals(const DiscreteOperator& A, const std::vector<double>& w, const std::vector<double>& rhs,
                    const std::vector<double>& phi);

// Discrete energy 2 h^d E with E = sum_r weight_r w_r (A w / 2 + c / 2 - b)_r;
// weight 1/2 on folded plane rows.
double discrete_energy(const DiscreteOperator& A, const std::vector<double>& w, const std::vector<double>& rhs);

// Interior-mode flux jump (d_{n+1} w)^+ - (d_{n+1} w)^- on plane nodes from
// second-order one-sided differences. Returned per storage id (0 elsewhere).
std::vector<double> flux_jump(const Field& w);

struct ObstacleReduction {
  Field v;
  Field f;
};

// v = w - phi (phi extended constantly in x_{n+1}) and the induced
// f = -(d_i a^{ij}) d_j phi - a^{ij} d_ij phi.
ObstacleReduction subtract_obstacle(const Field& w, const ScalarFn& phi, const MetricField& m);

struct InteriorNormalization {
  Field v;
  double b_tilde = 0.0;
};

// v = w - b~ x_{n+1}, b~ the upper one-sided flux at x0 from the exact fit
// w(x0 + t e) - w(x0) = b~ t + beta t^{3/2} through the two nearest nodes.
InteriorNormalization normalize_interior(const Field& w, const std::vector<std::size_t>& gamma, std::size_t x0);

}  // namespace signorini
