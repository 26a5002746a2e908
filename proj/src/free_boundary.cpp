#include "signorini/free_boundary.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "signorini/stats.hpp"

namespace signorini {

namespace {

// In-plane axis neighbors (axes 0..n-1) that exist as active plane nodes.
template <class F>
void for_plane_neighbors(const Grid& g, std::size_t id, F&& fn) {
  Idx i = g.multi(id);
  for (int a = 0; a < g.dim() - 1; ++a)
    for (int s = -1; s <= 1; s += 2) {
      Idx j = i;
      j[a] += s;
      if (!g.in_storage(j)) continue;
      std::size_t k = g.index(j);
      if (g.active(k)) fn(k);
    }
}

void finish_slit(SlitSet& s) {
  const Grid& g = *s.grid;
  s.gamma.clear();
  for (std::size_t id : s.lambda) {
    bool touches = false;
    for_plane_neighbors(g, id, [&](std::size_t k) { touches = touches || !s.in_lambda[k]; });
    if (touches) s.gamma.push_back(id);
  }
  s.no_free_boundary = s.lambda.empty() || s.omega.empty() || s.gamma.empty();
  s.dist_gamma.assign(g.size(), 0.0);
  s.dist_lambda.assign(g.size(), 0.0);
  if (!s.gamma.empty()) s.dist_gamma = distance_field(g, s.gamma);
  if (!s.lambda.empty()) s.dist_lambda = distance_field(g, s.lambda);
}

}  // namespace

SlitSet extract_sets(const Field& w, const Field* phi, double contact_tol) {
  require(contact_tol >= 0.0, ErrorCode::InvalidArgument, "contact_tol must be >= 0");
  SlitSet s;
  s.grid = w.grid;
  const Grid& g = *s.grid;
  s.in_lambda.assign(g.size(), 0);
  for (std::size_t id : g.plane_nodes()) {
    double gap = w.v[id] - (phi ? phi->v[id] : 0.0);
    if (gap <= contact_tol) {
      s.in_lambda[id] = 1;
      s.lambda.push_back(id);
    } else {
      s.omega.push_back(id);
    }
  }
  finish_slit(s);
  return s;
}

SlitSet slit_from_predicate(GridPtr gp, const std::function<bool(const Vec&)>& in_lambda) {
  SlitSet s;
  s.grid = std::move(gp);
  const Grid& g = *s.grid;
  s.in_lambda.assign(g.size(), 0);
  for (std::size_t id : g.plane_nodes()) {
    if (in_lambda(g.point(id))) {
      s.in_lambda[id] = 1;
      s.lambda.push_back(id);
    } else {
      s.omega.push_back(id);
    }
  }
  finish_slit(s);
  return s;
}

SlitSet transfer_slit(const SlitSet& src, GridPtr target) {
  const Grid& a = *src.grid;
  require(target->dim() == a.dim() && target->inv_h() == a.inv_h(), ErrorCode::InvalidArgument,
          "transfer_slit: grids must share the mesh");
  return slit_from_predicate(target, [&](const Vec& x) {
    std::size_t id = a.nearest_node(x);
    return id != Grid::npos && src.in_lambda[id];
  });
}

Vec GraphFit::point(std::size_t c) const {
  if (dim == 2) return {g[c], 0.0, 0.0};
  return {xpp[c], g[c], 0.0};
}

Vec GraphFit::normal(std::size_t c) const {
  if (dim == 2) return {static_cast<double>(side), 0.0, 0.0};
  double gp = grad_g[c];
  double nn = std::sqrt(1.0 + gp * gp);
  return {-side * gp / nn, side / nn, 0.0};
}

std::size_t GraphFit::column_near(const Vec& x) const {
  if (dim == 2 || xpp.empty()) return 0;
  std::size_t best = 0;
  for (std::size_t c = 1; c < xpp.size(); ++c)
    if (std::abs(xpp[c] - x[0]) < std::abs(xpp[best] - x[0])) best = c;
  return best;
}

std::vector<Vec> GraphFit::curve(double spacing, bool smoothed) const {
  std::vector<Vec> out;
  if (g.empty()) return out;
  if (dim == 2) {
    out.push_back(point(0));
    return out;
  }
  const bool sm = smoothed && g_smooth.size() == g.size();
  auto pt = [&](std::size_t c) { return sm ? Vec{xpp[c], g_smooth[c], 0.0} : point(c); };
  for (std::size_t c = 0; c + 1 < g.size(); ++c) {
    Vec a = pt(c), b = pt(c + 1);
    double len = norm(sub(b, a));
    // Columns are contiguous only when they are one cell apart.
    if (xpp[c + 1] - xpp[c] > 1.5 * h) {
      out.push_back(a);
      continue;
    }
    int k = std::max(1, static_cast<int>(std::ceil(len / spacing)));
    for (int j = 0; j < k; ++j) out.push_back(add(a, scale(sub(b, a), static_cast<double>(j) / k)));
  }
  out.push_back(pt(g.size() - 1));
  return out;
}

GraphFit fit_graph(const SlitSet& slit, const Field* w, const Field* phi, double window, int smooth) {
  require(!slit.gamma.empty(), ErrorCode::Precondition, "fit_graph: free boundary is empty");
  const Grid& g = *slit.grid;
  const int d = g.dim();
  const double h = g.h();
  GraphFit gf;
  gf.dim = d;
  gf.h = h;
  const int col_axis = 0;            // x'' when n = 2
  const int xn_axis = d - 2;         // x_n
  std::map<int, std::vector<std::size_t>> cols;
  for (std::size_t id : slit.gamma) {
    Idx i = g.multi(id);
    Vec x = g.point(i);
    // Columns beyond the window feed the slope fits near its edge.
    if (d == 3 && std::abs(x[col_axis]) > window + smooth * h + 1e-12) continue;
    if (d == 2 && std::abs(x[xn_axis]) > window + 1e-12) continue;
    cols[d == 3 ? i[col_axis] : 0].push_back(id);
  }
  require(!cols.empty(), ErrorCode::Precondition, "fit_graph: no free boundary nodes in the fit window");
  std::ostringstream bad;
  int nbad = 0;
  for (auto& [k, ids] : cols)
    if (ids.size() > 1) {
      if (nbad++ < 8) bad << (nbad > 1 ? ", " : "") << k * h;
    }
  if (nbad > 0) {
    std::ostringstream os;
    os << "free boundary is not graph-like: " << nbad << " columns with several nodes (x'' = " << bad.str()
       << (nbad > 8 ? ", ..." : "") << ")";
    fail(ErrorCode::Precondition, os.str());
  }
  // Side of Omega, from the first column.
  {
    Idx i = g.multi(cols.begin()->second.front());
    Idx up = i;
    up[xn_axis] += 1;
    bool up_omega = g.in_storage(up) && g.active(g.index(up)) && !slit.in_lambda[g.index(up)];
    gf.side = up_omega ? 1 : -1;
  }
  auto gap = [&](const Idx& i) -> double {
    if (!g.in_storage(i)) return -1.0;
    std::size_t id = g.index(i);
    if (!g.active(id) || slit.in_lambda[id] || w == nullptr) return -1.0;
    return w->v[id] - (phi ? phi->v[id] : 0.0);
  };
  for (auto& [k, ids] : cols) {
    Idx i = g.multi(ids.front());
    double tg = i[xn_axis] * h;
    double gv = tg;
    Idx i1 = i, i2 = i;
    i1[xn_axis] += gf.side;
    i2[xn_axis] += 2 * gf.side;
    double v1 = gap(i1), v2 = gap(i2);
    if (v1 > 0.0 && v2 > 0.0) {
      double u1 = std::pow(v1, 2.0 / 3.0), u2 = std::pow(v2, 2.0 / 3.0);
      double t1 = tg + gf.side * h, t2 = tg + 2 * gf.side * h;
      if (u2 > u1) {
        gv = t1 - u1 * (t2 - t1) / (u2 - u1);
        double lo = std::min(tg, t1), hi = std::max(tg, t1);
        gv = std::clamp(gv, lo, hi);
      } else {
        gv = tg + 0.5 * gf.side * h;
      }
    }
    gf.xpp.push_back(d == 3 ? k * h : 0.0);
    gf.g.push_back(gv);
    gf.g_node.push_back(tg);
    gf.gamma_node.push_back(ids.front());
  }
  const std::size_t C = gf.g.size();
  gf.grad_g.assign(C, 0.0);
  gf.g_smooth = gf.g;
  if (d == 3 && C > 1) {
    // Slope of a local quadratic least-squares fit over up to `smooth`
    // contiguous columns on each side; the sub-cell positions carry noise that
    // plain differences would amplify by 1/h.
    auto adj = [&](std::size_t a, std::size_t b) { return std::abs(gf.xpp[a] - gf.xpp[b]) < 1.5 * h; };
    for (std::size_t c = 0; c < C; ++c) {
      std::size_t lo = c, hi = c;
      while (lo > 0 && c - lo < static_cast<std::size_t>(smooth) && adj(lo - 1, lo)) --lo;
      while (hi + 1 < C && hi - c < static_cast<std::size_t>(smooth) && adj(hi, hi + 1)) ++hi;
      const std::size_t m = hi - lo + 1;
      if (m < 2) continue;
      const int deg = m >= 4 ? 2 : 1;
      Eigen::MatrixXd A(static_cast<Eigen::Index>(m), deg + 1);
      Eigen::VectorXd y(static_cast<Eigen::Index>(m));
      for (std::size_t k = lo; k <= hi; ++k) {
        double t = (gf.xpp[k] - gf.xpp[c]) / h;
        Eigen::Index r = static_cast<Eigen::Index>(k - lo);
        A(r, 0) = 1.0;
        A(r, 1) = t;
        if (deg == 2) A(r, 2) = t * t;
        y(r) = gf.g[k];
      }
      Eigen::VectorXd coef = A.colPivHouseholderQr().solve(y);
      gf.grad_g[c] = coef(1) / h;
      gf.g_smooth[c] = coef(0);
    }
  }
  if (d == 3) {
    GraphFit kept = gf;
    kept.xpp.clear(), kept.g.clear(), kept.g_node.clear(), kept.g_smooth.clear(), kept.grad_g.clear(),
        kept.gamma_node.clear();
    for (std::size_t c = 0; c < C; ++c) {
      if (std::abs(gf.xpp[c]) > window + 1e-12) continue;
      kept.xpp.push_back(gf.xpp[c]);
      kept.g.push_back(gf.g[c]);
      kept.g_node.push_back(gf.g_node[c]);
      kept.g_smooth.push_back(gf.g_smooth[c]);
      kept.grad_g.push_back(gf.grad_g[c]);
      kept.gamma_node.push_back(gf.gamma_node[c]);
    }
    require(!kept.g.empty(), ErrorCode::Precondition, "fit_graph: no free boundary nodes in the fit window");
    gf = std::move(kept);
  }
  const std::size_t CW = gf.g.size();
  for (double v : gf.grad_g) gf.lipschitz = std::max(gf.lipschitz, std::abs(v));

  std::vector<double> lx, ly;
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t a = 0; a < CW; ++a)
    for (std::size_t b = a + 1; b < CW; ++b) {
      double dist = std::abs(gf.xpp[a] - gf.xpp[b]);
      double diff = std::abs(gf.grad_g[a] - gf.grad_g[b]);
      if (dist < 4 * h - 1e-12 || dist > 0.25 + 1e-12) continue;
      pairs.emplace_back(dist, diff);
      if (diff > 1e-14) {
        lx.push_back(std::log(dist));
        ly.push_back(std::log(diff));
      }
    }
  if (lx.size() >= 2) {
    bool spread = std::any_of(lx.begin(), lx.end(), [&](double v) { return std::abs(v - lx[0]) > 1e-12; });
    if (spread) gf.holder_alpha = std::clamp(linear_fit(lx, ly).slope, 1e-3, 1.0);
  }
  for (auto& [dist, diff] : pairs) gf.holder_seminorm = std::max(gf.holder_seminorm, diff / std::pow(dist, gf.holder_alpha));
  return gf;
}

namespace {

double point_segment(const Vec& p, const Vec& a, const Vec& b) {
  Vec ab = sub(b, a);
  double L2 = dot(ab, ab);
  double t = L2 > 0 ? std::clamp(dot(sub(p, a), ab) / L2, 0.0, 1.0) : 0.0;
  return norm(sub(p, add(a, scale(ab, t))));
}

}  // namespace

FlatnessReport reifenberg_delta(const std::vector<Vec>& gamma, const std::vector<Vec>& centers,
                                const std::vector<double>& scales, int dim, double h) {
  FlatnessReport rep;
  for (double r : scales) require(r >= 8 * h - 1e-12, ErrorCode::Precondition, "reifenberg_delta: radius below 8h");
  for (const Vec& x0 : centers) {
    std::vector<double> lr, dl;
    for (double r : scales) {
      FlatnessEntry e;
      e.x0 = x0;
      e.r = r;
      std::vector<Vec> in;
      for (const Vec& p : gamma)
        if (norm(sub(p, x0)) <= r) in.push_back(p);
      if (in.size() < 2) {
        e.skipped = true;
        rep.entries.push_back(e);
        continue;
      }
      if (dim == 2) {
        double m = 0.0;
        for (const Vec& p : in) m = std::max(m, norm(sub(p, x0)));
        e.delta = std::min(1.0, m / r);
      } else {
        PointLocator loc(in, 2);
        const double spacing = std::min(h / 8.0, r / 64.0);
        const int ns = static_cast<int>(std::ceil(2 * r / spacing)) + 1;
        auto eval = [&](double th) {
          Vec tau{std::cos(th), std::sin(th), 0.0};
          Vec a = sub(x0, scale(tau, r)), b = add(x0, scale(tau, r));
          double m = 0.0;
          for (const Vec& p : in) m = std::max(m, point_segment(p, a, b));
          for (int k = 0; k < ns; ++k) {
            Vec q = add(a, scale(sub(b, a), static_cast<double>(k) / (ns - 1)));
            m = std::max(m, loc.distance(q));
          }
          return m / r;
        };
        const double deg = M_PI / 180.0;
        double best = 2.0, arg = 0.0;
        for (int k = 0; k < 180; ++k) {
          double v = eval(k * deg);
          if (v < best) best = v, arg = k * deg;
        }
        // Golden-section refinement inside the best 1-degree bracket.
        double lo = arg - deg, hi = arg + deg;
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double c = hi - gr * (hi - lo), dd = lo + gr * (hi - lo);
        double fc = eval(c), fd = eval(dd);
        for (int it = 0; it < 30; ++it) {
          if (fc < fd) {
            hi = dd, dd = c, fd = fc;
            c = hi - gr * (hi - lo), fc = eval(c);
          } else {
            lo = c, c = dd, fc = fd;
            dd = lo + gr * (hi - lo), fd = eval(dd);
          }
        }
        double th = 0.5 * (lo + hi), v = eval(th);
        if (v < best) best = v, arg = th;
        e.delta = std::min(1.0, best);
        e.angle = arg;
      }
      rep.worst_delta = std::max(rep.worst_delta, e.delta);
      lr.push_back(std::log(r));
      dl.push_back(e.delta);
      rep.entries.push_back(e);
    }
    double slope = 0.0;
    bool ok = true;
    if (lr.size() >= 2) {
      slope = linear_fit(lr, dl).slope;
      ok = slope >= -1e-9;
    }
    rep.trend_slope.push_back(slope);
    rep.trend_ok.push_back(ok);
  }
  return rep;
}

QuotientReport quotient_regularity(const Field& w, const GraphFit& gf, int axis_e, int kmax) {
  const Grid& g = *w.grid;
  const int d = g.dim();
  const int xn = d - 2;
  const double h = g.h();
  require(axis_e >= 0 && axis_e < d - 1, ErrorCode::InvalidArgument, "quotient direction must be tangential");
  QuotientReport rep;
  std::vector<double> exps;
  for (std::size_t c = 0; c < gf.g.size(); ++c) {
    Idx i0 = g.multi(gf.gamma_node[c]);
    std::vector<double> ds, qs;
    for (int k = 2; k <= kmax; ++k) {
      Idx i = i0;
      i[xn] += gf.side * k;
      bool ok = true;
      for (int a = 0; a < d - 1 && ok; ++a)
        for (int s = -1; s <= 1; s += 2) {
          Idx j = i;
          j[a] += s;
          if (!g.in_storage(j) || !g.active(g.index(j))) ok = false;
        }
      if (!ok) break;
      auto cd = [&](int a) {
        Idx p = i, m = i;
        p[a] += 1;
        m[a] -= 1;
        return (w.at(p) - w.at(m)) / (2 * h);
      };
      double den = gf.side * cd(xn);
      if (den <= 0.0) {
        Vec x = g.point(i);
        std::ostringstream os;
        os << "quotient_regularity: normal derivative vanishes at (" << x[0] << ", " << x[1] << ", " << x[2] << ")";
        fail(ErrorCode::Numerical, os.str());
      }
      ds.push_back(std::abs(i[xn] * h - gf.g[c]));
      qs.push_back(cd(axis_e) / den);
    }
    if (ds.size() < 3) continue;
    LinearFit lf = linear_fit(ds, qs);
    QuotientColumn col;
    col.xpp = gf.xpp[c];
    col.limit = lf.intercept;
    col.expected = axis_e == xn ? 1.0 : -gf.side * gf.grad_g[c];
    col.samples = static_cast<int>(ds.size());
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < ds.size(); ++k) {
      double dv = std::abs(qs[k] - lf.intercept);
      if (dv > 1e-14) {
        lx.push_back(std::log(ds[k]));
        ly.push_back(std::log(dv));
      }
    }
    if (lx.size() >= 2) {
      col.exponent = linear_fit(lx, ly).slope;
      exps.push_back(col.exponent);
    }
    rep.max_mismatch = std::max(rep.max_mismatch, std::abs(col.limit - col.expected));
    rep.columns.push_back(col);
  }
  rep.median_exponent = median(exps);
  return rep;
}

AsymptoticFrame frame_at(const Vec& x0, const MetricField& m, const GraphFit& gf) {
  require(!gf.g.empty(), ErrorCode::Precondition, "frame_at: no free boundary graph");
  std::size_t c = gf.column_near(x0);
  Vec p = gf.point(c);
  require(norm(sub(p, x0)) <= 2.0 * gf.h + 1e-12, ErrorCode::Precondition,
          "frame_at: too few free boundary nodes near x0 for a normal estimate");
  return make_frame(p, gf.normal(c), interpolate_tensor(m, p), m.dim());
}

}  // namespace signorini
