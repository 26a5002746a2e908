#include "signorini/metric.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace signorini {

namespace {

// Parity of component (r, c) under x_{n+1} -> -x_{n+1}.
int parity(int r, int c, int dim) {
  const int na = dim - 1;
  return ((r == na) != (c == na)) ? -1 : 1;
}

double mod_pattern(int i, int j) { return i == j ? 1.0 : 0.5; }
double phase(int i, int j) { return 0.7 * (i + 1) + 1.3 * (j + 1); }

}  // namespace

Tensor MetricGenerator::eval(const Vec& x, int dim) const {
  Tensor A{};
  const int na = dim - 1;
  double r = 0.0;
  for (int a = 0; a < dim; ++a) r += x[a] * x[a];
  r = std::sqrt(r);
  // Argument uses |x_{n+1}| so the diagonal blocks are even in x_{n+1}.
  double kx = 0.0;
  for (int a = 0; a < dim; ++a) kx += wavevector[a] * (a == na ? std::abs(x[a]) : x[a]);
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) {
      double v = amplitude * r * mod_pattern(i, j) * std::cos(kx + phase(i, j));
      if ((i == na) != (j == na)) v *= x[na];
      if (i == j) v += 1.0;
      A[i][j] = A[j][i] = v;
    }
  return A;
}

MetricField::MetricField(GridPtr grid, double p)
    : grid_(std::move(grid)), nc_(ncomp(grid_->dim())), p_(p), a_(grid_->size() * nc_, 0.0) {
  require(p > grid_->dim() || std::isinf(p), ErrorCode::InvalidArgument, "integrability exponent must exceed n+1");
}

int MetricField::comp(int i, int j, int dim) {
  if (i > j) std::swap(i, j);
  // Row-major packed upper triangle.
  return i * dim - i * (i - 1) / 2 + (j - i);
}

Tensor MetricField::tensor(std::size_t id) const {
  Tensor A{};
  const int d = grid_->dim();
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) A[i][j] = A[j][i] = a_[id * nc_ + comp(i, j, d)];
  return A;
}

Tensor MetricField::tensor_at(const Idx& i) const {
  const int d = grid_->dim();
  const int na = d - 1;
  if (grid_->half() && i[na] < 0) {
    Idx j = i;
    j[na] = -j[na];
    Tensor A = tensor(grid_->index(j));
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) A[r][c] *= parity(r, c, d);
    return A;
  }
  return tensor(grid_->index(i));
}

double MetricField::component_at(const Idx& i, int r, int c) const {
  const int d = grid_->dim();
  const int na = d - 1;
  if (grid_->half() && i[na] < 0) {
    Idx j = i;
    j[na] = -j[na];
    return parity(r, c, d) * get(grid_->index(j), r, c);
  }
  return get(grid_->index(i), r, c);
}

std::array<double, 3> sym_eigenvalues(const Tensor& A, int dim) {
  std::array<double, 3> ev{0, 0, 0};
  if (dim == 2) {
    Eigen::Matrix2d M;
    M << A[0][0], A[0][1], A[1][0], A[1][1];
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es;
    es.computeDirect(M, Eigen::EigenvaluesOnly);
    ev[0] = es.eigenvalues()[0];
    ev[1] = es.eigenvalues()[1];
  } else {
    Eigen::Matrix3d M;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) M(r, c) = A[r][c];
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
    es.computeDirect(M, Eigen::EigenvaluesOnly);
    for (int k = 0; k < 3; ++k) ev[k] = es.eigenvalues()[k];
  }
  return ev;
}

namespace {

void check_window(const MetricField& m) {
  const Grid& g = *m.grid();
  const int d = g.dim();
  for (std::size_t id : g.active_nodes()) {
    auto ev = sym_eigenvalues(m.tensor(id), d);
    if (ev[0] < 0.5 - 1e-12 || ev[d - 1] > 2.0 + 1e-12) {
      std::ostringstream os;
      Vec x = g.point(id);
      os << "metric eigenvalues [" << ev[0] << ", " << ev[d - 1] << "] leave [1/2, 2] at (" << x[0] << ", " << x[1]
         << ", " << x[2] << ")";
      fail(ErrorCode::InvalidArgument, os.str());
    }
  }
}

}  // namespace

MetricField make_identity(GridPtr grid) {
  MetricField m(grid, kInf);
  const int d = grid->dim();
  for (std::size_t id : grid->active_nodes())
    for (int i = 0; i < d; ++i) m.set(id, i, i, 1.0);
  m.set_generator(MetricGenerator{});
  m.set_cstar(0.0);
  return m;
}

MetricField make_from_generator(GridPtr grid, const MetricGenerator& gen) {
  MetricField m(grid, gen.p);
  const int d = grid->dim();
  for (std::size_t id : grid->active_nodes()) {
    Tensor A = gen.eval(grid->point(id), d);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) m.set(id, i, j, A[i][j]);
  }
  m.set_generator(gen);
  check_window(m);
  m.set_cstar(gen.amplitude == 0.0 ? 0.0 : gradient_lp_norm(m, 1.0, gen.p));
  return m;
}

MetricField make_perturbed(GridPtr grid, double amplitude, const Vec& wavevector, double p) {
  require(amplitude >= 0.0 && std::isfinite(amplitude), ErrorCode::InvalidArgument, "amplitude must be >= 0");
  MetricGenerator gen;
  gen.amplitude = amplitude;
  gen.wavevector = wavevector;
  gen.p = p;
  return make_from_generator(std::move(grid), gen);
}

MetricField make_constant(GridPtr grid, const Tensor& A) {
  MetricField m(grid, kInf);
  const int d = grid->dim();
  for (std::size_t id : grid->active_nodes())
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) m.set(id, i, j, A[i][j]);
  check_window(m);
  return m;
}

double gradient_lp_norm(const MetricField& m, double radius, double p) {
  const Grid& g = *m.grid();
  const int d = g.dim();
  const int na = d - 1;
  const double h = g.h();
  auto ok = [&](Idx i) {
    if (g.half() && i[na] < 0) i[na] = -i[na];
    for (int a = 0; a < d; ++a)
      if (i[a] < g.lo(a) || i[a] > g.hi(a)) return false;
    return g.active(g.index(i));
  };
  double best = 0.0;
  for (int r = 0; r < d; ++r)
    for (int c = r; c < d; ++c) {
      double acc = 0.0;
      for (std::size_t id : g.active_nodes()) {
        Vec x = g.point(id);
        if (norm(x) >= radius) continue;
        Idx i = g.multi(id);
        double c0 = m.component_at(i, r, c);
        double g2 = 0.0;
        for (int a = 0; a < d; ++a) {
          Idx ip = i, im = i;
          ip[a] += 1;
          im[a] -= 1;
          bool op = ok(ip), om = ok(im);
          double da = 0.0;
          if (op && om) da = (m.component_at(ip, r, c) - m.component_at(im, r, c)) / (2 * h);
          else if (op) da = (m.component_at(ip, r, c) - c0) / h;
          else if (om) da = (c0 - m.component_at(im, r, c)) / h;
          g2 += da * da;
        }
        double gn = std::sqrt(g2);
        if (std::isinf(p)) {
          acc = std::max(acc, gn);
        } else {
          double wgt = 1.0;
          if (g.half()) wgt = i[na] == 0 ? 1.0 : 2.0;
          acc += wgt * std::pow(gn, p);
        }
      }
      double v = std::isinf(p) ? acc : std::pow(acc * std::pow(h, d), 1.0 / p);
      best = std::max(best, v);
    }
  return best;
}

bool AssumptionReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const AssumptionCheck& c) { return c.pass; });
}

AssumptionReport check_assumptions(const MetricField& m) {
  const Grid& g = *m.grid();
  const int d = g.dim();
  const int na = d - 1;
  AssumptionReport rep;

  AssumptionCheck a1{"A1", true, 0.0, {0, 0, 0}, "max |a^{i,n+1}| on the thin plane"};
  for (std::size_t id : g.plane_nodes())
    for (int i = 0; i < na; ++i) {
      double v = std::abs(m.get(id, i, na));
      if (v > a1.worst) {
        a1.worst = v;
        a1.worst_point = g.point(id);
      }
    }
  a1.pass = a1.worst <= 1e-12;

  AssumptionCheck a2{"A2", true, 0.0, {0, 0, 0}, "largest violation of the eigenvalue window [1/2, 2]"};
  double lo = kInf, hi = -kInf;
  for (std::size_t id : g.active_nodes()) {
    auto ev = sym_eigenvalues(m.tensor(id), d);
    lo = std::min(lo, ev[0]);
    hi = std::max(hi, ev[d - 1]);
    double viol = std::max({0.0, 0.5 - ev[0], ev[d - 1] - 2.0});
    if (viol > a2.worst) {
      a2.worst = viol;
      a2.worst_point = g.point(id);
    }
  }
  a2.pass = a2.worst <= 1e-12;
  {
    std::ostringstream os;
    os << "eigenvalue range [" << lo << ", " << hi << "]";
    a2.detail = os.str();
  }

  AssumptionCheck a3{"A3", true, 0.0, {0, 0, 0}, "p > n+1 and finite ||grad a||_{L^p}"};
  double cs = gradient_lp_norm(m, 1.0, m.p());
  a3.worst = cs;
  a3.pass = (std::isinf(m.p()) || m.p() > d) && std::isfinite(cs);

  AssumptionCheck a4{"A4", true, 0.0, {0, 0, 0}, "max |a^{ij}(0) - delta^{ij}|"};
  std::size_t o = g.index({0, 0, 0});
  Tensor A0 = m.tensor(o);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a4.worst = std::max(a4.worst, std::abs(A0[i][j] - (i == j ? 1.0 : 0.0)));
  a4.pass = a4.worst <= 1e-12;

  rep.checks = {a1, a2, a3, a4};

  double expo = std::isinf(m.p()) ? 1.0 : 1.0 - d / m.p();
  double ratio = 0.0;
  if (cs > 0.0) {
    for (std::size_t id : g.active_nodes()) {
      Vec x = g.point(id);
      double r = norm(x);
      if (r == 0.0) continue;
      Tensor A = m.tensor(id);
      double dev = 0.0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) dev = std::max(dev, std::abs(A[i][j] - (i == j ? 1.0 : 0.0)));
      ratio = std::max(ratio, dev / (cs * std::pow(r, expo)));
    }
  }
  rep.morrey_ratio = ratio;
  return rep;
}

double solution_l2_norm(const Field& w) { return ball_norm(w, {0, 0, 0}, 1.0); }

MetricField reflect_extend(const MetricField& m, GridPtr full) {
  const Grid& src = *m.grid();
  require(src.half(), ErrorCode::Precondition, "reflect_extend expects a half-ball metric");
  require(!full->half() && full->dim() == src.dim() && full->inv_h() == src.inv_h(), ErrorCode::InvalidArgument,
          "reflect_extend target must be the full grid of the same mesh");
  const int d = src.dim();
  const int na = d - 1;
  for (std::size_t id : src.plane_nodes())
    for (int i = 0; i < na; ++i)
      if (std::abs(m.get(id, i, na)) > 1e-10) {
        Vec x = src.point(id);
        std::ostringstream os;
        os << "(A1) violated at (" << x[0] << ", " << x[1] << ", " << x[2]
           << "): odd reflection would be discontinuous";
        fail(ErrorCode::Precondition, os.str());
      }
  MetricField out(full, m.p());
  for (std::size_t id : full->active_nodes()) {
    Idx i = full->multi(id);
    for (int r = 0; r < d; ++r)
      for (int c = r; c < d; ++c) out.set(id, r, c, m.component_at(i, r, c));
  }
  out.set_cstar(m.cstar());
  if (m.generated()) out.set_generator(m.generator());
  return out;
}

MetricField restrict_to(const MetricField& m, GridPtr coarse) {
  const Grid& f = *m.grid();
  require(coarse->dim() == f.dim() && coarse->half() == f.half() && f.inv_h() % coarse->inv_h() == 0,
          ErrorCode::InvalidArgument, "restrict_to: coarse grid must nest in the fine grid");
  const int ratio = f.inv_h() / coarse->inv_h();
  const int d = f.dim();
  MetricField out(coarse, m.p());
  for (std::size_t id : coarse->active_nodes()) {
    Idx i = coarse->multi(id);
    for (int a = 0; a < d; ++a) i[a] *= ratio;
    std::size_t fid = f.index(i);
    for (int r = 0; r < d; ++r)
      for (int c = r; c < d; ++c) out.set(id, r, c, m.get(fid, r, c));
  }
  out.set_cstar(m.cstar());
  if (m.generated()) out.set_generator(m.generator());
  return out;
}

Tensor interpolate_tensor(const MetricField& m, const Vec& x) {
  const Grid& g = *m.grid();
  const int d = g.dim();
  const double h = g.h();
  Idx base{0, 0, 0};
  Vec t{0, 0, 0};
  for (int a = 0; a < d; ++a) {
    double s = x[a] / h;
    int b = std::clamp(static_cast<int>(std::floor(s)), -g.inv_h(), g.inv_h() - 1);
    base[a] = b;
    t[a] = std::clamp(s - b, 0.0, 1.0);
  }
  Tensor out{};
  double den = 0.0;
  for (int c = 0; c < (1 << d); ++c) {
    Idx j = base;
    double wgt = 1.0;
    for (int a = 0; a < d; ++a) {
      int bit = (c >> a) & 1;
      j[a] += bit;
      wgt *= bit ? t[a] : 1.0 - t[a];
    }
    if (wgt == 0.0 || !g.in_storage(j) || !g.active(g.canonical(j))) continue;
    Tensor T = m.tensor_at(j);
    for (int r = 0; r < d; ++r)
      for (int q = 0; q < d; ++q) out[r][q] += wgt * T[r][q];
    den += wgt;
  }
  require(den > 0.0, ErrorCode::Precondition, "interpolate_tensor: point outside the grid ball");
  for (int r = 0; r < d; ++r)
    for (int q = 0; q < d; ++q) out[r][q] /= den;
  return out;
}

}  // namespace signorini
