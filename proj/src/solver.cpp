#include "signorini/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace signorini {

namespace {

int encode(const Idx& d) { return (d[0] + 1) * 9 + (d[1] + 1) * 3 + (d[2] + 1); }

bool positive_definite(const Tensor& A, int dim) {
  if (A[0][0] <= 0.0) return false;
  double m2 = A[0][0] * A[1][1] - A[0][1] * A[1][0];
  if (m2 <= 0.0) return false;
  if (dim == 2) return true;
  double det = A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1]) - A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0]) +
               A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0]);
  return det > 0.0;
}

}  // namespace

double DiscreteOperator::apply(std::size_t r, const std::vector<double>& w) const {
  const std::size_t S = offsets.size();
  const std::size_t id = rows[r];
  const double* c = &coef[r * S];
  double s = diag[r] * w[id];
  for (std::size_t k = 0; k < S; ++k) s += c[k] * w[id + offsets[k]];
  return s;
}

DiscreteOperator assemble_operator(const MetricField& m) {
  const GridPtr& gp = m.grid();
  const Grid& g = *gp;
  const int d = g.dim();
  const int na = d - 1;
  const double h2 = g.h() * g.h();
  DiscreteOperator A;
  A.grid = gp;

  std::vector<Idx> deltas;
  int slot[27];
  std::fill(std::begin(slot), std::end(slot), -1);
  int cnt = 1;
  for (int a = 0; a < d; ++a) cnt *= 3;
  for (int c = 0; c < cnt; ++c) {
    Idx dl{0, 0, 0};
    int t = c, nz = 0;
    for (int a = 0; a < d; ++a) {
      dl[a] = t % 3 - 1;
      t /= 3;
      nz += dl[a] != 0;
    }
    if (nz == 0 || nz > 2) continue;
    slot[encode(dl)] = static_cast<int>(deltas.size());
    deltas.push_back(dl);
    std::ptrdiff_t off = 0;
    for (int a = 0; a < d; ++a) off += dl[a] * g.stride(a);
    A.offsets.push_back(off);
  }
  const std::size_t S = deltas.size();

  A.row_of.assign(g.size(), -1);
  for (std::size_t id : g.active_nodes())
    if (g.kind(id) == NodeKind::Interior) {
      A.row_of[id] = static_cast<std::int32_t>(A.rows.size());
      A.rows.push_back(id);
    }
  A.diag.assign(A.rows.size(), 0.0);
  A.coef.assign(A.rows.size() * S, 0.0);
  A.plane.assign(A.rows.size(), 0);

  for (std::size_t r = 0; r < A.rows.size(); ++r) {
    const Idx i = g.multi(A.rows[r]);
    const bool on_plane = i[na] == 0;
    A.plane[r] = on_plane;
    const bool fold = on_plane && g.half();
    double* c = &A.coef[r * S];
    auto add = [&](Idx dl, double v) {
      if (fold && dl[na] < 0) dl[na] = -dl[na];
      c[slot[encode(dl)]] += v;
    };
    auto shift = [&](int a, int s) {
      Idx j = i;
      j[a] += s;
      return j;
    };
    for (int k = 0; k < d; ++k) {
      Tensor Tp = m.tensor_at(shift(k, 1)), Tm = m.tensor_at(shift(k, -1)), T0 = m.tensor_at(i);
      Tensor Fp{}, Fm{};
      for (int x = 0; x < d; ++x)
        for (int y = 0; y < d; ++y) {
          Fp[x][y] = 0.5 * (T0[x][y] + Tp[x][y]);
          Fm[x][y] = 0.5 * (T0[x][y] + Tm[x][y]);
        }
      if (!positive_definite(Fp, d) || !positive_definite(Fm, d)) {
        Vec x = g.point(i);
        std::ostringstream os;
        os << "non-elliptic face tensor next to (" << x[0] << ", " << x[1] << ", " << x[2] << ")";
        fail(ErrorCode::Numerical, os.str());
      }
      double ap = Fp[k][k], am = Fm[k][k];
      Idx e{0, 0, 0};
      e[k] = 1;
      add(e, -ap / h2);
      e[k] = -1;
      add(e, -am / h2);
      A.diag[r] += (ap + am) / h2;
    }
    for (int k = 0; k < d; ++k)
      for (int l = k + 1; l < d; ++l) {
        auto cv = [&](int a, int s) { return m.component_at(shift(a, s), k, l); };
        const double q = 1.0 / (4.0 * h2);
        Idx dl{0, 0, 0};
        dl[k] = 1, dl[l] = 1;
        add(dl, -(cv(k, 1) + cv(l, 1)) * q);
        dl[k] = 1, dl[l] = -1;
        add(dl, (cv(k, 1) + cv(l, -1)) * q);
        dl[k] = -1, dl[l] = 1;
        add(dl, (cv(k, -1) + cv(l, 1)) * q);
        dl[k] = -1, dl[l] = -1;
        add(dl, -(cv(k, -1) + cv(l, -1)) * q);
      }
  }
  return A;
}

SolveMode parse_mode(const std::string& s) {
  if (s == "boundary_zero") return SolveMode::BoundaryZero;
  if (s == "boundary_obstacle") return SolveMode::BoundaryObstacle;
  if (s == "interior") return SolveMode::Interior;
  fail(ErrorCode::InvalidArgument, "unknown mode '" + s + "'");
}

const char* to_string(SolveMode m) {
  switch (m) {
    case SolveMode::BoundaryZero: return "boundary_zero";
    case SolveMode::BoundaryObstacle: return "boundary_obstacle";
    case SolveMode::Interior: return "interior";
  }
  return "boundary_zero";
}

double default_omega(const Grid& g) {
  // Jacobi spectral radius of the Dirichlet Laplacian on the unit ball.
  const double lambda1 = g.dim() == 2 ? 5.783185962946784 : 9.869604401089358;
  const double h = g.h();
  double rho = 1.0 - lambda1 * h * h / (2.0 * g.dim());
  return 2.0 / (1.0 + std::sqrt(1.0 - rho * rho));
}

Residuals residuals(const DiscreteOperator& A, const std::vector<double>& w, const std::vector<double>& rhs,
                    const std::vector<double>& phi) {
  Residuals out;
  for (std::size_t r = 0; r < A.rows.size(); ++r) {
    const std::size_t id = A.rows[r];
    double flux = (A.apply(r, w) - rhs[r]) / A.diag[r];
    if (!A.plane[r]) {
      out.pde = std::max(out.pde, std::abs(flux));
    } else {
      double gap = w[id] - phi[id];
      double v = std::max({std::abs(std::min(gap, flux)), -gap, -flux});
      out.complementarity = std::max(out.complementarity, v);
    }
  }
  return out;
}

double discrete_energy(const DiscreteOperator& A, const std::vector<double>& w, const std::vector<double>& rhs) {
  const Grid& g = *A.grid;
  const std::size_t S = A.stencil();
  double E = 0.0;
  for (std::size_t r = 0; r < A.rows.size(); ++r) {
    const std::size_t id = A.rows[r];
    const double* c = &A.coef[r * S];
    double dir = 0.0;
    for (std::size_t k = 0; k < S; ++k)
      if (A.row_of[id + A.offsets[k]] < 0) dir += c[k] * w[id + A.offsets[k]];
    double weight = (g.half() && A.plane[r]) ? 0.5 : 1.0;
    E += weight * w[id] * (0.5 * A.apply(r, w) + 0.5 * dir - rhs[r]);
  }
  return 2.0 * std::pow(g.h(), g.dim()) * E;
}

namespace {

Field prolongate(const Field& coarse, const GridPtr& fine) {
  Field out(fine, coarse.mode);
  for (std::size_t id : fine->active_nodes()) out.v[id] = interpolate(coarse, fine->point(id));
  return out;
}

SolveReport solve_level(const ProblemSpec& spec, const MetricField& m, const Field* init) {
  auto t0 = std::chrono::steady_clock::now();
  const GridPtr& gp = m.grid();
  const Grid& g = *gp;
  const bool interior = spec.mode == SolveMode::Interior;
  require(interior != g.half(), ErrorCode::Precondition,
          interior ? "interior mode needs a full-ball grid" : "boundary modes need a half-ball grid");
  require(static_cast<bool>(spec.dirichlet), ErrorCode::Precondition, "Dirichlet data missing");
  require(spec.mode != SolveMode::BoundaryObstacle || static_cast<bool>(spec.phi), ErrorCode::Precondition,
          "boundary_obstacle mode requires an obstacle");

  DiscreteOperator A = assemble_operator(m);
  const int na = g.normal_axis();
  SolveReport rep;
  rep.w = Field(gp, interior ? FieldMode::InteriorObstacle : FieldMode::BoundaryObstacle);
  rep.phi = Field(gp, FieldMode::Auxiliary);
  std::vector<double>& w = rep.w.v;
  std::vector<double>& phi = rep.phi.v;
  if (spec.phi)
    for (std::size_t id : g.plane_nodes()) phi[id] = spec.phi(g.point(id));

  for (std::size_t id : g.active_nodes()) {
    if (A.row_of[id] >= 0) continue;
    Vec x = g.point(id);
    w[id] = spec.dirichlet(x);
    if (std::abs(x[na]) < 1e-15 && w[id] < phi[id] - 1e-12) {
      std::ostringstream os;
      os << "Dirichlet data " << w[id] << " below the obstacle " << phi[id] << " at (" << x[0] << ", " << x[1] << ", "
         << x[2] << ")";
      fail(ErrorCode::Precondition, os.str());
    }
  }
  std::vector<double> rhs(A.rows.size(), 0.0);
  for (std::size_t r = 0; r < A.rows.size(); ++r) {
    const std::size_t id = A.rows[r];
    if (spec.f) rhs[r] = -spec.f(g.point(id));
    double v = init ? init->v[id] : 0.0;
    if (!std::isfinite(v)) v = 0.0;
    if (A.plane[r]) v = std::max(v, phi[id]);
    w[id] = v;
  }

  const double omega = spec.params.omega > 0.0 ? spec.params.omega : default_omega(g);
  require(omega > 0.0 && omega < 2.0, ErrorCode::InvalidArgument, "relaxation factor must lie in (0, 2)");
  rep.omega = omega;
  const std::size_t S = A.stencil();
  const std::size_t R = A.rows.size();
  const long max_sweeps = spec.params.max_sweeps;
  const int every = std::max(1, spec.params.check_every);
  rep.energy_history.push_back(discrete_energy(A, w, rhs));
  long sweep = 0;
  Residuals res = residuals(A, w, rhs, phi);
  bool done = res.pde <= spec.params.tol && res.complementarity <= spec.params.tol;
  while (!done && sweep < max_sweeps) {
    for (std::size_t q = 0; q < R; ++q) {
      const std::size_t r = spec.params.reverse_order ? R - 1 - q : q;
      const std::size_t id = A.rows[r];
      const double* c = &A.coef[r * S];
      double s = rhs[r];
      for (std::size_t k = 0; k < S; ++k) s -= c[k] * w[id + A.offsets[k]];
      double nw = w[id] + omega * (s / A.diag[r] - w[id]);
      if (A.plane[r] && nw < phi[id]) nw = phi[id];
      w[id] = nw;
    }
    ++sweep;
    if (sweep % every == 0) {
      res = residuals(A, w, rhs, phi);
      rep.energy_history.push_back(discrete_energy(A, w, rhs));
      done = res.pde <= spec.params.tol && res.complementarity <= spec.params.tol;
    }
  }
  res = residuals(A, w, rhs, phi);
  rep.sweeps = sweep;
  rep.pde_residual = res.pde;
  rep.complementarity_residual = res.complementarity;
  rep.converged = res.pde <= spec.params.tol && res.complementarity <= spec.params.tol;
  rep.energy = discrete_energy(A, w, rhs);
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace

SolveReport solve_psor(const ProblemSpec& spec) {
  require(spec.metric != nullptr, ErrorCode::Precondition, "problem has no metric");
  const MetricField& m = *spec.metric;
  const Grid& g = *m.grid();
  int levels = spec.params.continuation;
  if (spec.initial != nullptr || levels <= 0 || g.inv_h() % 2 != 0 || g.inv_h() / 2 < 8)
    return solve_level(spec, m, spec.initial);

  auto t0 = std::chrono::steady_clock::now();
  GridSpec cs = g.spec();
  cs.inv_h /= 2;
  auto coarse = std::make_shared<const Grid>(cs);
  ProblemSpec sub = spec;
  sub.metric = std::make_shared<const MetricField>(restrict_to(m, coarse));
  sub.params.continuation = levels - 1;
  SolveReport c = solve_psor(sub);
  Field init = prolongate(c.w, m.grid());
  SolveReport rep = solve_level(spec, m, &init);
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

std::vector<double> flux_jump(const Field& w) {
  const Grid& g = *w.grid;
  std::vector<double> out(g.size(), 0.0);
  const int na = g.normal_axis();
  for (std::size_t id : g.plane_nodes()) {
    Vec up = gradient(w, id, 1), lo = gradient(w, id, -1);
    out[id] = up[na] - lo[na];
  }
  return out;
}

ObstacleReduction subtract_obstacle(const Field& w, const ScalarFn& phi, const MetricField& m) {
  const GridPtr& gp = w.grid;
  const Grid& g = *gp;
  const int d = g.dim();
  const int na = d - 1;
  const double h = g.h();
  ObstacleReduction out{Field(gp, FieldMode::SplitComponent), Field(gp, FieldMode::Auxiliary)};
  auto ext = [&](Vec x) {
    x[na] = 0.0;
    return phi ? phi(x) : 0.0;
  };
  for (std::size_t id : g.active_nodes()) {
    Vec x = g.point(id);
    out.v.v[id] = w.v[id] - ext(x);
    Idx i = g.multi(id);
    double f = 0.0;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        double aij = m.get(id, a, b);
        Vec ea{0, 0, 0}, eb{0, 0, 0};
        ea[a] = h;
        eb[b] = h;
        double dab = (ext(add(add(x, ea), eb)) - ext(sub(add(x, ea), eb)) - ext(add(sub(x, ea), eb)) +
                      ext(sub(sub(x, ea), eb))) /
                     (4 * h * h);
        f -= aij * dab;
        double db = (ext(add(x, eb)) - ext(sub(x, eb))) / (2 * h);
        if (db == 0.0) continue;
        Idx ip = i, im = i;
        ip[a] += 1;
        im[a] -= 1;
        bool okp = g.in_storage(ip) && g.active(g.canonical(ip));
        bool okm = g.in_storage(im) && g.active(g.canonical(im));
        double da = 0.0;
        if (okp && okm) da = (m.component_at(ip, a, b) - m.component_at(im, a, b)) / (2 * h);
        else if (okp) da = (m.component_at(ip, a, b) - aij) / h;
        else if (okm) da = (aij - m.component_at(im, a, b)) / h;
        f -= da * db;
      }
    out.f.v[id] = f;
  }
  return out;
}

InteriorNormalization normalize_interior(const Field& w, const std::vector<std::size_t>& gamma, std::size_t x0) {
  require(std::find(gamma.begin(), gamma.end(), x0) != gamma.end(), ErrorCode::Precondition,
          "normalize_interior: x0 is not a free boundary node");
  const Grid& g = *w.grid;
  const int na = g.normal_axis();
  const double h = g.h();
  Idx i = g.multi(x0);
  Idx i1 = i, i2 = i;
  i1[na] += 1;
  i2[na] += 2;
  double w0 = w.at(i), w1 = w.at(i1) - w0, w2 = w.at(i2) - w0;
  // b t + beta t^{3/2} through t = h and t = 2h.
  const double t1 = h, t2 = 2 * h;
  const double s1 = std::pow(t1, 1.5), s2 = std::pow(t2, 1.5);
  const double det = t1 * s2 - t2 * s1;
  const double b = (w1 * s2 - w2 * s1) / det;
  InteriorNormalization out{Field(w.grid, w.mode), b};
  for (std::size_t id : g.active_nodes()) out.v.v[id] = w.v[id] - b * g.point(id)[na];
  return out;
}

}  // namespace signorini
