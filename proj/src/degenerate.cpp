#include "signorini/degenerate.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "signorini/stats.hpp"

namespace signorini {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Trip = Eigen::Triplet<double>;

struct Unknowns {
  std::vector<std::size_t> ids;
  std::vector<std::int64_t> col;  // storage id -> unknown index, -1 for Dirichlet
};

// Operator rows (full 3^d neighborhood active) that are not contact nodes.
Unknowns unknown_set(const Grid& g, const SlitSet& s) {
  Unknowns u;
  u.col.assign(g.size(), -1);
  for (std::size_t id : g.active_nodes()) {
    if (g.kind(id) != NodeKind::Interior) continue;
    if (!s.in_lambda.empty() && s.in_lambda[id]) continue;
    u.col[id] = static_cast<std::int64_t>(u.ids.size());
    u.ids.push_back(id);
  }
  return u;
}

double floored_dist(const SlitSet& s, std::size_t id, double h) { return std::max(s.dist_gamma[id], 0.5 * h); }

void check_problem(const SplitProblem& sp) {
  require(sp.metric != nullptr, ErrorCode::InvalidArgument, "split problem: metric missing");
  const Grid& g = *sp.metric->grid();
  require(!g.half(), ErrorCode::Precondition, "split problem: the degenerate equation lives on the full ball");
  require(sp.slit.grid && sp.slit.grid.get() == sp.metric->grid().get(), ErrorCode::InvalidArgument,
          "split problem: slit and metric must share the grid");
  require(sp.slit.has_gamma(), ErrorCode::Precondition, "split problem: free boundary is empty");
  require(sp.sigma >= 0.0, ErrorCode::InvalidArgument, "split problem: sigma must be >= 0");
  for (const auto& f : sp.F)
    require(f.empty() || f.size() == g.size(), ErrorCode::InvalidArgument, "split problem: F has the wrong size");
  require(sp.g.empty() || sp.g.size() == g.size(), ErrorCode::InvalidArgument, "split problem: g has the wrong size");
}

double potential(const SplitProblem& sp) { return sp.K > 0.0 ? sp.K : default_potential(sp.sigma); }

double max_abs_on(const std::vector<double>& v, const std::vector<std::size_t>& ids) {
  double m = 0.0;
  for (std::size_t id : ids) m = std::max(m, std::abs(v[id]));
  return m;
}

}  // namespace

double default_potential(double sigma) { return 16.0 * (sigma + 1.0); }

Field reflect_to_full(const Field& half, GridPtr full, int parity) {
  const Grid& hg = *half.grid;
  require(hg.half() && !full->half() && hg.dim() == full->dim() && hg.inv_h() == full->inv_h(),
          ErrorCode::InvalidArgument, "reflect_to_full: expects a half grid and the matching full grid");
  Field out(full, half.mode);
  const int na = full->dim() - 1;
  for (std::size_t id : full->active_nodes()) {
    Idx i = full->multi(id);
    out.v[id] = half.at(i, parity);
    if (i[na] == 0 && parity < 0) out.v[id] = 0.0;
  }
  return out;
}

std::vector<double> central_derivative(const Field& f, int axis) {
  const Grid& g = *f.grid;
  std::vector<double> out(g.size(), 0.0);
  const std::ptrdiff_t s = g.stride(axis);
  const double inv = 0.5 / g.h();
  for (std::size_t id : g.active_nodes())
    if (g.kind(id) == NodeKind::Interior) out[id] = (f.v[id + s] - f.v[id - s]) * inv;
  return out;
}

std::vector<double> apply_degenerate(const SplitProblem& sp, const Field& u) {
  check_problem(sp);
  const Grid& g = *sp.metric->grid();
  DiscreteOperator A = assemble_operator(*sp.metric);
  Unknowns U = unknown_set(g, sp.slit);
  const double K = potential(sp);
  std::vector<double> out(g.size(), 0.0);
  for (std::size_t id : U.ids) {
    std::size_t r = static_cast<std::size_t>(A.row_of[id]);
    double d = floored_dist(sp.slit, id, g.h());
    out[id] = -A.apply(r, u.v) - K * u.v[id] / (d * d);
  }
  return out;
}

DegenerateSolution solve_degenerate(const SplitProblem& sp) {
  check_problem(sp);
  const Grid& g = *sp.metric->grid();
  const int d = g.dim();
  const double h = g.h();
  DiscreteOperator A = assemble_operator(*sp.metric);
  Unknowns U = unknown_set(g, sp.slit);
  const std::size_t N = U.ids.size();
  require(N > 0, ErrorCode::Precondition, "solve_degenerate: no unknowns");
  const double K = potential(sp);
  const std::size_t S = A.stencil();

  // -d_i a^{ij} d_j + K dist^{-2}, symmetric positive definite.
  std::vector<Trip> trips;
  trips.reserve(N * (S + 1));
  Eigen::VectorXd b(static_cast<Eigen::Index>(N));
  for (std::size_t k = 0; k < N; ++k) {
    std::size_t id = U.ids[k];
    std::size_t r = static_cast<std::size_t>(A.row_of[id]);
    double dist = floored_dist(sp.slit, id, h);
    trips.emplace_back(k, k, A.diag[r] + K / (dist * dist));
    for (std::size_t s = 0; s < S; ++s) {
      double c = A.coef[r * S + s];
      if (c == 0.0) continue;
      std::int64_t j = U.col[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(id) + A.offsets[s])];
      if (j >= 0) trips.emplace_back(k, j, c);
    }
    double rhs = sp.g.empty() ? 0.0 : sp.g[id];
    for (int a = 0; a < d; ++a) {
      if (sp.F[a].empty()) continue;
      std::ptrdiff_t st = g.stride(a);
      rhs += (sp.F[a][id + st] - sp.F[a][id - st]) / (2.0 * h);
    }
    b(static_cast<Eigen::Index>(k)) = -rhs;
  }
  SpMat M(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  M.setFromTriplets(trips.begin(), trips.end());

  Eigen::VectorXd x;
  // Direct factorization fills in badly for 27-point stencils; 3D uses preconditioned CG.
  if (N <= (d == 2 ? 600000u : 30000u)) {
    Eigen::SimplicialLDLT<SpMat> solver(M);
    require(solver.info() == Eigen::Success, ErrorCode::Numerical, "solve_degenerate: factorization failed (singular system)");
    x = solver.solve(b);
  } else {
    Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>> cg;
    cg.setTolerance(1e-12);
    cg.setMaxIterations(20000);
    cg.compute(M);
    require(cg.info() == Eigen::Success, ErrorCode::Numerical, "solve_degenerate: preconditioner failed");
    x = cg.solve(b);
    require(cg.info() == Eigen::Success, ErrorCode::NotConverged, "solve_degenerate: CG did not converge");
  }

  DegenerateSolution out;
  out.u = Field(sp.metric->grid(), FieldMode::SplitComponent);
  for (std::size_t k = 0; k < N; ++k) out.u.v[U.ids[k]] = x(static_cast<Eigen::Index>(k));
  out.K = K;
  out.unknowns = N;
  Eigen::VectorXd res = M * x - b;
  double bn = b.cwiseAbs().maxCoeff();
  out.residual = res.cwiseAbs().maxCoeff() / std::max(bn, 1e-300);
  return out;
}

SplitPair split_tangential_derivative(const Field& w_half, const MetricField& m_half, const SlitSet& slit_half,
                                      int axis_e, double K, double sigma) {
  const Grid& hg = *w_half.grid;
  const int d = hg.dim();
  require(axis_e >= 0 && axis_e < d - 1, ErrorCode::InvalidArgument, "split: direction must be tangential");
  auto full = std::make_shared<const Grid>(GridSpec{d, hg.inv_h(), false});
  Field w = reflect_to_full(w_half, full);
  auto m = std::make_shared<const MetricField>(reflect_extend(m_half, full));

  SplitProblem sp;
  sp.metric = m;
  sp.slit = transfer_slit(slit_half, full);
  sp.K = K;
  sp.sigma = sigma;
  sp.p = m_half.p();
  std::vector<std::vector<double>> dw(d);
  for (int j = 0; j < d; ++j) dw[j] = central_derivative(w, j);
  const std::ptrdiff_t se = full->stride(axis_e);
  const double inv = 0.5 / full->h();
  for (int i = 0; i < d; ++i) sp.F[i].assign(full->size(), 0.0);
  for (std::size_t id : full->active_nodes()) {
    if (full->kind(id) != NodeKind::Interior) continue;
    for (int i = 0; i < d; ++i) {
      double acc = 0.0;
      for (int j = 0; j < d; ++j) {
        double dea = (m->get(id + se, i, j) - m->get(id - se, i, j)) * inv;
        acc += dea * dw[j][id];
      }
      sp.F[i][id] = -acc;
    }
  }
  DegenerateSolution v1 = solve_degenerate(sp);

  SplitPair out;
  out.K = v1.K;
  out.residual = v1.residual;
  out.u_err = v1.u;
  out.u_main = Field(full, FieldMode::SplitComponent);
  const std::vector<double>& de = dw[axis_e];
  for (std::size_t id : full->active_nodes()) out.u_main.v[id] = de[id] - v1.u.v[id];
  std::vector<std::size_t> region;
  for (std::size_t id : full->active_nodes()) {
    Vec x = full->point(id);
    if (x[d - 1] >= 0.0 && norm(x) <= 0.5 && full->kind(id) == NodeKind::Interior) region.push_back(id);
  }
  double ref = max_abs_on(de, region);
  out.err_ratio = ref > 0 ? max_abs_on(v1.u.v, region) / ref : 0.0;
  return out;
}

SplitPair split_solution(const Field& w_half, const MetricField& m_half, const SlitSet& slit_half,
                         const ScalarFn& f, double ell0) {
  const Grid& hg = *w_half.grid;
  const int d = hg.dim();
  const int n = d - 1;
  auto full = std::make_shared<const Grid>(GridSpec{d, hg.inv_h(), false});
  const Grid& g = *full;
  const double h = g.h();
  Field w = reflect_to_full(w_half, full);
  MetricField m = reflect_extend(m_half, full);
  SlitSet slit = transfer_slit(slit_half, full);
  require(slit.has_gamma(), ErrorCode::Precondition, "split_solution: free boundary is empty");
  Unknowns U = unknown_set(g, slit);
  const std::size_t N = U.ids.size();
  require(N > 0, ErrorCode::Precondition, "split_solution: no unknowns");

  std::vector<std::vector<double>> dw(d);
  for (int j = 0; j < d; ++j) dw[j] = central_derivative(w, j);

  std::vector<Trip> trips;
  trips.reserve(N * 19);
  Eigen::VectorXd b(static_cast<Eigen::Index>(N));
  const double h2 = h * h;
  for (std::size_t k = 0; k < N; ++k) {
    std::size_t id = U.ids[k];
    Idx i = g.multi(id);
    auto put = [&](std::ptrdiff_t off, double c) {
      std::int64_t j = U.col[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(id) + off)];
      if (j >= 0) trips.emplace_back(k, j, c);
    };
    double dist = floored_dist(slit, id, h);
    double diag = -1.0 / (dist * dist);
    for (int a = 0; a < d; ++a) {
      double c = m.get(id, a, a) / h2;
      diag -= 2.0 * c;
      put(g.stride(a), c);
      put(-g.stride(a), c);
    }
    for (int a = 0; a < d; ++a)
      for (int c2 = a + 1; c2 < d; ++c2) {
        double q = 2.0 * m.get(id, a, c2) / (4.0 * h2);
        if (q == 0.0) continue;
        std::ptrdiff_t sa = g.stride(a), sc = g.stride(c2);
        put(sa + sc, q);
        put(sa - sc, -q);
        put(-sa + sc, -q);
        put(-sa - sc, q);
      }
    trips.emplace_back(k, k, diag);
    double rhs = f ? f(g.point(i)) : 0.0;
    for (int a = 0; a < d; ++a) {
      double div = 0.0;
      std::ptrdiff_t sa = g.stride(a);
      for (int j = 0; j < d; ++j) div += (m.get(id + sa, a, j) - m.get(id - sa, a, j)) / (2.0 * h) * dw[j][id];
      rhs -= div;
    }
    b(static_cast<Eigen::Index>(k)) = rhs;
  }
  SpMat M(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  M.setFromTriplets(trips.begin(), trips.end());
  M.makeCompressed();
  Eigen::SparseLU<SpMat> lu;
  lu.analyzePattern(M);
  lu.factorize(M);
  require(lu.info() == Eigen::Success, ErrorCode::Numerical, "split_solution: factorization failed (singular system)");
  Eigen::VectorXd x = lu.solve(b);

  SplitPair out;
  out.K = 1.0;
  out.u_err = Field(full, FieldMode::SplitComponent);
  for (std::size_t k = 0; k < N; ++k) out.u_err.v[U.ids[k]] = x(static_cast<Eigen::Index>(k));
  out.u_main = Field(full, FieldMode::SplitComponent);
  for (std::size_t id : g.active_nodes()) out.u_main.v[id] = w.v[id] - out.u_err.v[id];
  Eigen::VectorXd res = M * x - b;
  out.residual = res.cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), 1e-300);

  const double gexp = 1.0 - (n + 1) / m_half.p();
  if (ell0 <= 0) ell0 = 1.0 / (16.0 * std::sqrt(static_cast<double>(n)));
  std::vector<double> dun = central_derivative(out.u_main, d - 2);
  double bound = 0.0, lower = std::numeric_limits<double>::infinity();
  for (std::size_t id : g.active_nodes()) {
    if (g.kind(id) != NodeKind::Interior) continue;
    Vec x = g.point(id);
    if (x[d - 1] < 0.0) continue;
    double dg = slit.dist_gamma[id], dl = slit.dist_lambda[id];
    if (dg < 2.0 * h || dl < h) continue;
    bound = std::max(bound, std::abs(out.u_err.v[id]) / (dl * std::pow(dg, gexp)));
    if (dl >= ell0 * dg && norm(x) <= 0.5) lower = std::min(lower, dun[id] / (dl / std::sqrt(dg)));
  }
  out.bound_ratio = bound;
  out.lower_ratio = std::isfinite(lower) ? lower : 0.0;
  std::vector<std::size_t> region;
  for (std::size_t id : g.active_nodes()) {
    Vec x = g.point(id);
    if (x[d - 1] >= 0.0 && norm(x) <= 0.5) region.push_back(id);
  }
  double ref = max_abs_on(w.v, region);
  out.err_ratio = ref > 0 ? max_abs_on(out.u_err.v, region) / ref : 0.0;
  return out;
}

DecayFit ray_decay(const Field& u, const SlitSet& slit, const Vec& x0, double dmin, double dmax) {
  const Grid& g = *u.grid;
  const int d = g.dim();
  require(slit.grid.get() == u.grid.get(), ErrorCode::InvalidArgument, "ray_decay: slit and field grids differ");
  std::size_t c = g.nearest_node(x0);
  require(c != Grid::npos, ErrorCode::InvalidArgument, "ray_decay: center outside the grid");
  Idx i0 = g.multi(c);
  DecayFit out;
  std::vector<double> lx, ly;
  for (int k = 1;; ++k) {
    Idx i = i0;
    i[d - 2] += k;
    i[d - 1] += k;
    if (!g.in_storage(i)) break;
    std::size_t id = g.index(i);
    if (!g.active(id)) break;
    double dist = slit.dist_gamma[id];
    if (dist > dmax) break;
    if (dist < dmin) continue;
    double v = std::abs(u.v[id]);
    out.dist.push_back(dist);
    out.value.push_back(v);
    if (v > 1e-300) {
      lx.push_back(std::log(dist));
      ly.push_back(std::log(v));
    }
  }
  require(lx.size() >= 3, ErrorCode::Precondition, "ray_decay: fewer than 3 usable samples on the ray");
  LinearFit lf = linear_fit(lx, ly);
  out.slope = lf.slope;
  out.r2 = lf.r2;
  return out;
}

}  // namespace signorini
