#include "signorini/whitney.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "signorini/degenerate.hpp"
#include "signorini/parallel.hpp"
#include "signorini/solver.hpp"

namespace signorini {

namespace {

std::uint64_t pack(int level, const Idx& k) {
  return (static_cast<std::uint64_t>(level) << 57) | (static_cast<std::uint64_t>(k[0]) << 38) |
         (static_cast<std::uint64_t>(k[1]) << 19) | static_cast<std::uint64_t>(k[2]);
}

double side_of(int level) { return std::ldexp(2.0, -level); }

double box_point_dist(const Vec& lo, const Vec& hi, const Vec& p, int d) {
  double s = 0.0;
  for (int a = 0; a < d; ++a) {
    double e = std::max({lo[a] - p[a], 0.0, p[a] - hi[a]});
    s += e * e;
  }
  return std::sqrt(s);
}

double box_set_dist(const Vec& lo, const Vec& hi, const std::vector<Vec>& pts, int d) {
  double best = std::numeric_limits<double>::infinity();
  for (const Vec& p : pts) best = std::min(best, box_point_dist(lo, hi, p, d));
  return best;
}

// C-infinity step: 0 for u <= 0, 1 for u >= 1.
double smooth_step(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  double a = std::exp(-1.0 / u), b = std::exp(-1.0 / (1.0 - u));
  return a / (a + b);
}

// 1 for t <= 1/4, 0 for t >= 9/16 (t in units of the side, from the center).
double bump_1d(double t) { return 1.0 - smooth_step((t - 0.25) / (9.0 / 16.0 - 0.25)); }

std::size_t nearest_center(const WhitneyDecomposition& wd, const Vec& x) {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < wd.cubes.size(); ++k) {
    double dd = norm(sub(wd.cubes[k].center, x)) - 0.5 * wd.cubes[k].diam;
    if (dd < bd) {
      bd = dd;
      best = k;
    }
  }
  return best;
}

}  // namespace

int WhitneyDecomposition::find(int level, const Idx& key) const {
  auto it = lookup.find(pack(level, key));
  return it == lookup.end() ? -1 : static_cast<int>(it->second);
}

int WhitneyDecomposition::locate(const Vec& x) const {
  for (int L = 1; L <= max_level; ++L) {
    const double s = side_of(L);
    const int n = 1 << L;
    Idx k{0, 0, 0};
    bool inside = true;
    for (int a = 0; a < dim; ++a) {
      int j = static_cast<int>(std::floor((x[a] + 1.0) / s));
      if (j == n && x[a] <= 1.0) j = n - 1;
      if (j < 0 || j >= n) inside = false;
      k[a] = j;
    }
    if (!inside) return -1;
    int c = find(L, k);
    if (c >= 0) return c;
  }
  return -1;
}

WhitneyDecomposition whitney_decompose(const SlitSet& slit, double min_side) {
  require(slit.grid != nullptr, ErrorCode::InvalidArgument, "whitney_decompose: slit has no grid");
  require(slit.has_gamma(), ErrorCode::Precondition, "whitney_decompose: Gamma is empty");
  const Grid& g = *slit.grid;
  WhitneyDecomposition wd;
  wd.dim = g.dim();
  wd.h = g.h();
  if (min_side <= 0.0) min_side = g.h();
  for (std::size_t id : slit.gamma) wd.gamma.push_back(g.point(id));
  const int d = wd.dim;
  const double sq = std::sqrt(static_cast<double>(d));

  struct Item {
    int level;
    Idx key;
  };
  std::vector<Item> stack{{0, {0, 0, 0}}};
  while (!stack.empty()) {
    Item it = stack.back();
    stack.pop_back();
    const double s = side_of(it.level);
    Vec lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < d; ++a) {
      lo[a] = -1.0 + it.key[a] * s;
      hi[a] = lo[a] + s;
    }
    if (box_point_dist(lo, hi, Vec{0, 0, 0}, d) >= 1.0) continue;
    const double diam = s * sq;
    const double dist = box_set_dist(lo, hi, wd.gamma, d);
    if (it.level > 0 && diam <= dist) {
      WhitneyCube q;
      q.level = it.level;
      q.key = it.key;
      q.side = s;
      q.diam = diam;
      q.dist = dist;
      for (int a = 0; a < d; ++a) q.center[a] = 0.5 * (lo[a] + hi[a]);
      wd.lookup.emplace(pack(q.level, q.key), static_cast<std::uint32_t>(wd.cubes.size()));
      wd.cubes.push_back(q);
      wd.max_level = std::max(wd.max_level, q.level);
      continue;
    }
    if (0.5 * s < min_side * (1.0 - 1e-12)) continue;
    for (int c = 0; c < (1 << d); ++c) {
      Item ch{it.level + 1, {0, 0, 0}};
      for (int a = 0; a < d; ++a) ch.key[a] = 2 * it.key[a] + ((c >> a) & 1);
      stack.push_back(ch);
    }
  }
  require(!wd.cubes.empty(), ErrorCode::Precondition, "whitney_decompose: no cubes (mesh too coarse)");

  // Touching pairs are found from the finer (or equal-level) cube by scanning
  // the coarser levels, whose candidate ranges are at most 3 per axis.
  wd.neighbors.assign(wd.cubes.size(), {});
  const int M = wd.max_level;
  for (std::size_t c = 0; c < wd.cubes.size(); ++c) {
    const WhitneyCube& q = wd.cubes[c];
    const long long mq = 1LL << (M - q.level);
    std::array<long long, 3> lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < d; ++a) {
      lo[a] = q.key[a] * mq;
      hi[a] = (q.key[a] + 1) * mq;
    }
    for (int L = 1; L <= q.level; ++L) {
      const long long m = 1LL << (M - L);
      const long long nmax = (1LL << L) - 1;
      std::array<long long, 3> jlo{0, 0, 0}, jhi{0, 0, 0};
      for (int a = 0; a < d; ++a) {
        jlo[a] = std::max(0LL, (lo[a] + m - 1) / m - 1);
        jhi[a] = std::min(nmax, hi[a] / m);
      }
      for (long long j0 = jlo[0]; j0 <= jhi[0]; ++j0)
        for (long long j1 = jlo[1]; j1 <= jhi[1]; ++j1)
          for (long long j2 = (d > 2 ? jlo[2] : 0); j2 <= (d > 2 ? jhi[2] : 0); ++j2) {
            Idx k{static_cast<int>(j0), static_cast<int>(j1), static_cast<int>(j2)};
            int o = wd.find(L, k);
            if (o < 0 || static_cast<std::size_t>(o) == c) continue;
            if (L == q.level && static_cast<std::size_t>(o) < c) continue;
            wd.neighbors[c].push_back(static_cast<std::uint32_t>(o));
            wd.neighbors[static_cast<std::size_t>(o)].push_back(static_cast<std::uint32_t>(c));
          }
    }
  }
  return wd;
}

bool WhitneyCheck::pass() const {
  const double e = 1e-12;
  return w1_min >= 1.0 - e && w1_max <= 4.0 + e && w2_min >= 0.25 - e && w2_max <= 4.0 + e &&
         max_touching <= touching_bound && symmetric;
}

WhitneyCheck check_whitney(const WhitneyDecomposition& wd) {
  WhitneyCheck c;
  c.cubes = wd.cubes.size();
  c.touching_bound = 1;
  for (int a = 0; a < wd.dim; ++a) c.touching_bound *= 12;
  c.w1_min = c.w2_min = std::numeric_limits<double>::infinity();
  c.w1_max = c.w2_max = 0.0;
  c.symmetric = true;
  const int na = wd.dim - 1;
  for (std::size_t k = 0; k < wd.cubes.size(); ++k) {
    const WhitneyCube& q = wd.cubes[k];
    double r = q.dist / q.diam;
    c.w1_min = std::min(c.w1_min, r);
    c.w1_max = std::max(c.w1_max, r);
    c.max_touching = std::max(c.max_touching, static_cast<int>(wd.neighbors[k].size()));
    for (std::uint32_t o : wd.neighbors[k]) {
      double ratio = q.diam / wd.cubes[o].diam;
      c.w2_min = std::min(c.w2_min, ratio);
      c.w2_max = std::max(c.w2_max, ratio);
    }
    Idx m = q.key;
    m[na] = (1 << q.level) - 1 - m[na];
    if (wd.find(q.level, m) < 0) c.symmetric = false;
  }
  if (c.w2_max == 0.0) c.w2_min = c.w2_max = 1.0;
  return c;
}

NormalCertificate approximate_normals(WhitneyDecomposition& wd, const SlitSet& slit) {
  require(!wd.cubes.empty(), ErrorCode::Precondition, "approximate_normals: empty decomposition");
  require(slit.grid && slit.grid->dim() == wd.dim, ErrorCode::InvalidArgument, "approximate_normals: slit grid mismatch");
  const Grid& g = *slit.grid;
  const int d = wd.dim, n = d - 1;
  PointLocator loc(wd.gamma, d);
  NormalCertificate cert;

  struct Fit {
    Vec nu;
    Vec mean;
    double flat;
  };
  std::map<std::pair<std::size_t, long long>, Fit> cache;

  auto orient = [&](const Vec& x0, Vec nu) {
    std::size_t c = g.nearest_node(x0);
    if (c == Grid::npos) return nu;
    Idx i0 = g.multi(c);
    const int R = 6;
    double score = 0.0;
    Idx i = i0;
    for (int a = -R; a <= R; ++a)
      for (int b = (n > 1 ? -R : 0); b <= (n > 1 ? R : 0); ++b) {
        i[0] = i0[0] + a;
        if (n > 1) i[1] = i0[1] + b;
        if (!g.in_storage(i)) continue;
        std::size_t id = g.index(i);
        if (!g.active(id)) continue;
        double t = dot(sub(g.point(id), x0), nu);
        score += slit.in_lambda[id] ? -t : t;
      }
    return score < 0.0 ? scale(nu, -1.0) : nu;
  };

  auto fit = [&](const Vec& x0, double R) {
    std::vector<Vec> pts;
    for (const Vec& p : wd.gamma)
      if (norm(sub(p, x0)) <= R) pts.push_back(p);
    Fit f{{0, 0, 0}, {0, 0, 0}, 0.0};
    if (n == 1) {
      f.nu[0] = 1.0;
      double mean = 0.0;
      for (const Vec& p : pts) mean += p[0];
      mean /= static_cast<double>(pts.size());
      f.mean[0] = mean;
      for (const Vec& p : pts) f.flat = std::max(f.flat, std::abs(p[0] - mean));
    } else {
      double mx = 0.0, my = 0.0;
      for (const Vec& p : pts) {
        mx += p[0];
        my += p[1];
      }
      mx /= static_cast<double>(pts.size());
      my /= static_cast<double>(pts.size());
      Eigen::Matrix2d C = Eigen::Matrix2d::Zero();
      for (const Vec& p : pts) {
        Eigen::Vector2d v(p[0] - mx, p[1] - my);
        C += v * v.transpose();
      }
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(C);
      Eigen::Vector2d nv = es.eigenvectors().col(0);
      if (pts.size() < 2) nv = Eigen::Vector2d(1.0, 0.0);
      f.nu = {nv(0), nv(1), 0.0};
      f.mean = {mx, my, 0.0};
      for (const Vec& p : pts) f.flat = std::max(f.flat, std::abs((p[0] - mx) * nv(0) + (p[1] - my) * nv(1)));
    }
    f.nu = orient(x0, f.nu);
    f.flat /= R;
    return f;
  };

  for (WhitneyCube& q : wd.cubes) {
    std::size_t pj = loc.nearest(q.center);
    q.projection = wd.gamma[pj];
    // Flatness is only asserted up to unit scale; larger balls are capped at 1.
    // Balls reaching past the sphere use Gamma inside B_1 and are flagged.
    double R = std::min(64.0 * q.diam, 1.0);
    q.clamped = 64.0 * q.diam > 1.0 || norm(q.projection) + R > 1.0;
    if (q.clamped) ++cert.clamped;
    q.fit_radius = R;
    auto key = std::make_pair(pj, std::llround(R / wd.h * 1024.0));
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, fit(q.projection, R)).first;
    q.normal = it->second.nu;
    q.flatness = it->second.flat;
    // Lattice Gamma nodes scatter by up to a cell across the true boundary;
    // anchoring on the fitted plane keeps neighboring charts consistent.
    q.anchor = sub(q.projection, scale(q.normal, dot(sub(q.projection, it->second.mean), q.normal)));
    cert.max_flatness = std::max(cert.max_flatness, q.flatness);
  }
  for (std::size_t k = 0; k < wd.cubes.size(); ++k)
    for (std::uint32_t o : wd.neighbors[k]) {
      double jump = norm(sub(wd.cubes[k].normal, wd.cubes[o].normal));
      cert.max_jump = std::max(cert.max_jump, jump);
      double eps = std::max(wd.cubes[k].flatness, wd.cubes[o].flatness);
      if (jump > 1e-12) cert.certificate = std::max(cert.certificate, jump / std::max(eps, 1e-12));
    }
  wd.has_normals = true;
  return cert;
}

double cube_bump(const WhitneyCube& q, const Vec& x, int dim) {
  double v = 1.0;
  for (int a = 0; a < dim && v > 0.0; ++a) v *= bump_1d(std::abs(x[a] - q.center[a]) / q.side);
  return v;
}

std::vector<std::pair<std::uint32_t, double>> partition_weights(const WhitneyDecomposition& wd, const Vec& x,
                                                                bool* covered) {
  std::vector<std::pair<std::uint32_t, double>> out;
  int l = wd.locate(x);
  if (covered) *covered = l >= 0;
  if (l < 0) {
    out.emplace_back(static_cast<std::uint32_t>(nearest_center(wd, x)), 1.0);
    return out;
  }
  double sum = 0.0;
  auto add = [&](std::uint32_t k) {
    double b = cube_bump(wd.cubes[k], x, wd.dim);
    if (b > 0.0) {
      out.emplace_back(k, b);
      sum += b;
    }
  };
  add(static_cast<std::uint32_t>(l));
  for (std::uint32_t k : wd.neighbors[static_cast<std::size_t>(l)]) add(k);
  for (auto& e : out) e.second /= sum;
  return out;
}

BarrierKind parse_barrier_kind(const std::string& s) {
  if (s == "h_minus_s") return BarrierKind::HMinusS;
  if (s == "h_zero") return BarrierKind::HZero;
  fail(ErrorCode::InvalidArgument, "unknown barrier kind '" + s + "'");
}

const char* to_string(BarrierKind k) { return k == BarrierKind::HMinusS ? "h_minus_s" : "h_zero"; }

Vec BarrierChart::apply(const Vec& x, int dim) const {
  Vec y{0, 0, 0}, dx = sub(x, x0);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) y[i] += M[i][j] * dx[j];
  return y;
}

BarrierChart make_chart(const Vec& x0, const Vec& nu, const Tensor& A, int dim) {
  const int na = dim - 1, tn = dim - 2;
  Eigen::Matrix3d Am = Eigen::Matrix3d::Identity();
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) Am(i, j) = A[i][j];
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(Am);
  require(es.info() == Eigen::Success && es.eigenvalues().minCoeff() > 0.0, ErrorCode::Numerical,
          "barrier chart: tensor is not positive definite");
  Eigen::Matrix3d B = es.operatorSqrt();
  Eigen::Matrix3d Binv = es.operatorInverseSqrt();
  Eigen::Vector3d v(nu[0], nu[1], nu[2]);
  Eigen::Vector3d rn = B * v;
  Eigen::Vector3d en = Eigen::Vector3d::Zero();
  en(na) = 1.0;
  Eigen::Vector3d rp = B * en;
  BarrierChart c;
  c.x0 = x0;
  c.nu = nu;
  c.c1 = rn.norm();
  c.c2 = rp.norm();
  rn /= c.c1;
  rp -= rp.dot(rn) * rn;
  rp.normalize();
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  R.row(tn) = rn.transpose();
  R.row(na) = rp.transpose();
  if (dim == 3) R.row(0) = rn.cross(rp).transpose();
  Eigen::Matrix3d Mm = R * Binv;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) c.M[i][j] = (i < dim && j < dim) ? Mm(i, j) : 0.0;
  return c;
}

namespace {

bool in_lambda_node(const SlitSet& slit, const Grid& g, std::size_t id) {
  return g.on_plane(id) && !slit.in_lambda.empty() && slit.in_lambda[id];
}

// (d_i a^{ij}) d_j f with central differences at operator nodes.
std::vector<double> first_order_term(const MetricField& m, const Field& f) {
  const Grid& g = *m.grid();
  const int d = g.dim();
  const double inv = 0.5 / g.h();
  std::vector<double> out(g.size(), 0.0);
  for (std::size_t id : g.active_nodes()) {
    if (g.kind(id) != NodeKind::Interior) continue;
    double acc = 0.0;
    for (int i = 0; i < d; ++i) {
      const std::ptrdiff_t si = g.stride(i);
      for (int j = 0; j < d; ++j) {
        const std::ptrdiff_t sj = g.stride(j);
        double da = (m.get(id + si, i, j) - m.get(id - si, i, j)) * inv;
        double df = (f.v[id + sj] - f.v[id - sj]) * inv;
        acc += da * df;
      }
    }
    out[id] = acc;
  }
  return out;
}

}  // namespace

BarrierField build_barrier(BarrierKind kind, double s, const WhitneyDecomposition& wd, const MetricField& m,
                           const SlitSet& slit, double K) {
  require(wd.has_normals, ErrorCode::Precondition, "build_barrier: approximate normals not computed");
  const GridPtr& gp = m.grid();
  const Grid& g = *gp;
  require(!g.half(), ErrorCode::Precondition, "build_barrier: the barrier lives on the full ball");
  require(slit.grid && slit.grid.get() == gp.get(), ErrorCode::InvalidArgument, "build_barrier: slit and metric grids differ");
  require(wd.dim == g.dim(), ErrorCode::InvalidArgument, "build_barrier: dimension mismatch");
  if (kind == BarrierKind::HMinusS)
    require(s > 0.0 && s < 0.5, ErrorCode::InvalidArgument, "build_barrier: s must lie in (0, 1/2)");
  else
    s = 0.0;
  const int d = g.dim();

  BarrierField b;
  b.kind = kind;
  b.s = s;
  b.charts.reserve(wd.cubes.size());
  for (const WhitneyCube& q : wd.cubes) b.charts.push_back(make_chart(q.anchor, q.normal, interpolate_tensor(m, q.projection), d));

  const ProfileKind pk = kind == BarrierKind::HMinusS ? ProfileKind::W12Power : ProfileKind::W12;
  b.blend = Field(gp, FieldMode::Auxiliary);
  const auto& nodes = g.active_nodes();
  std::vector<std::uint8_t> cov(nodes.size(), 1);
  std::vector<double> defect(nodes.size(), 0.0);
  parallel_for(nodes.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) {
      std::size_t id = nodes[k];
      if (in_lambda_node(slit, g, id)) continue;
      Vec x = g.point(id);
      bool covered = false;
      auto wts = partition_weights(wd, x, &covered);
      double v = 0.0, sum = 0.0;
      for (const auto& [c, eta] : wts) {
        Vec y = b.charts[c].apply(x, d);
        v += eta * eval_profile(pk, y[d - 2], y[d - 1], s);
        sum += eta;
      }
      b.blend.v[id] = v;
      cov[k] = covered;
      if (covered) defect[k] = std::abs(sum - 1.0);
    }
  });
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (!cov[k]) ++b.uncovered;
    b.partition_defect = std::max(b.partition_defect, defect[k]);
  }

  b.q = Field(gp, FieldMode::SplitComponent);
  b.values = b.blend;
  if (kind == BarrierKind::HMinusS) {
    std::vector<double> G = first_order_term(m, b.blend);
    double gmax = 0.0;
    for (double v : G) gmax = std::max(gmax, std::abs(v));
    SplitProblem sp;
    sp.metric = std::make_shared<const MetricField>(m);
    sp.slit = slit;
    sp.K = K > 0.0 ? K : default_potential(0.0);
    sp.p = m.p();
    b.K = sp.K;
    if (gmax > 0.0) {
      sp.g.resize(G.size());
      for (std::size_t i = 0; i < G.size(); ++i) sp.g[i] = -G[i];
      DegenerateSolution sol = solve_degenerate(sp);
      b.q = sol.u;
      b.q_residual = sol.residual;
      for (std::size_t id : nodes) b.values.v[id] += b.q.v[id];
    }
  }
  return b;
}

BarrierReport verify_barrier(const BarrierField& b, const MetricField& m, const SlitSet& slit, double dmin_cells,
                             double ell0, double alpha) {
  const Grid& g = *m.grid();
  require(b.values.grid && b.values.grid.get() == m.grid().get(), ErrorCode::InvalidArgument,
          "verify_barrier: barrier and metric grids differ");
  const int d = g.dim(), n = d - 1;
  const double h = g.h();
  if (ell0 <= 0.0) ell0 = 1.0 / (16.0 * std::sqrt(static_cast<double>(n)));
  const double p = m.p();
  const double gamma = std::isinf(p) ? 1.0 : 1.0 - (n + 1) / p;
  const double s = b.s;

  BarrierReport r;
  r.s = s;
  r.dmin = dmin_cells * h;
  r.closed_form_min = s * (1.0 + s) / 4.0;
  r.min_weighted_L = std::numeric_limits<double>::infinity();
  r.max_weighted_L = -std::numeric_limits<double>::infinity();
  r.cone_min = std::numeric_limits<double>::infinity();
  r.global_lower = std::numeric_limits<double>::infinity();

  DiscreteOperator A = assemble_operator(m);
  std::vector<double> g1 = first_order_term(m, b.values);
  const double eL = 1.5 - 0.5 * s;
  const double e2 = 1.5 - std::min(alpha, gamma);
  const double eg = 1.5 - (n + 1) / p;
  double g1acc = 0.0;
  for (std::size_t id : g.active_nodes()) {
    const double hv = b.values.v[id];
    if (in_lambda_node(slit, g, id)) {
      r.lambda_max_abs = std::max(r.lambda_max_abs, std::abs(hv));
      continue;
    }
    const double dist = slit.dist_gamma[id];
    r.global_lower = std::min(r.global_lower, hv / std::pow(std::max(dist, 0.5 * h), eg));
    if (dist < r.dmin) continue;
    if (slit.dist_lambda[id] >= ell0 * dist) r.cone_min = std::min(r.cone_min, hv / std::pow(dist, 0.5 + 0.5 * s));
    if (A.row_of[id] < 0) continue;
    const double Lh = -A.apply(static_cast<std::size_t>(A.row_of[id]), b.values.v);
    const double wl = Lh * std::pow(dist, eL);
    ++r.samples;
    if (wl < r.min_weighted_L) {
      r.min_weighted_L = wl;
      r.argmin = g.point(id);
    }
    r.max_weighted_L = std::max(r.max_weighted_L, wl);
    const double a1 = std::abs(g1[id]) * std::sqrt(dist);
    if (std::isinf(p))
      g1acc = std::max(g1acc, a1);
    else
      g1acc += std::pow(a1, p) * std::pow(h, d);
    r.g2_norm = std::max(r.g2_norm, std::abs(Lh - g1[id]) * std::pow(dist, e2));
  }
  r.g1_norm = std::isinf(p) ? g1acc : std::pow(g1acc, 1.0 / p);
  return r;
}

void write_whitney_csv(const WhitneyDecomposition& wd, const std::string& path) {
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorCode::Io, "cannot write " + path);
  os.precision(17);
  os << "level";
  for (int a = 0; a < wd.dim; ++a) os << ",center_" << a;
  os << ",diameter,dist";
  for (int a = 0; a < wd.dim; ++a) os << ",projection_" << a;
  for (int a = 0; a < wd.dim; ++a) os << ",normal_" << a;
  for (int a = 0; a < wd.dim; ++a) os << ",anchor_" << a;
  os << ",fit_radius,clamped,flatness\n";
  for (const WhitneyCube& q : wd.cubes) {
    os << q.level;
    for (int a = 0; a < wd.dim; ++a) os << ',' << q.center[a];
    os << ',' << q.diam << ',' << q.dist;
    for (int a = 0; a < wd.dim; ++a) os << ',' << q.projection[a];
    for (int a = 0; a < wd.dim; ++a) os << ',' << q.normal[a];
    for (int a = 0; a < wd.dim; ++a) os << ',' << q.anchor[a];
    os << ',' << q.fit_radius << ',' << (q.clamped ? 1 : 0) << ',' << q.flatness << '\n';
  }
}

}  // namespace signorini
