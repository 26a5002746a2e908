#include "signorini/asymptotics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "signorini/stats.hpp"

namespace signorini {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Multilinear interpolation of nodal gradients (upper one-sided normal
// derivative on the plane).
Vec interpolate_gradient(const Field& w, const Vec& x) {
  const Grid& g = *w.grid;
  const int d = g.dim();
  const double h = g.h();
  Idx base{0, 0, 0};
  Vec t{0, 0, 0};
  for (int a = 0; a < d; ++a) {
    double s = x[a] / h;
    base[a] = static_cast<int>(std::floor(s));
    if (base[a] >= g.hi(a)) base[a] = g.hi(a) - 1;
    t[a] = s - base[a];
  }
  Vec acc{0, 0, 0};
  double wsum = 0.0;
  for (int c = 0; c < (1 << d); ++c) {
    Idx i = base;
    double wt = 1.0;
    for (int a = 0; a < d; ++a) {
      int bit = (c >> a) & 1;
      i[a] += bit;
      wt *= bit ? t[a] : 1.0 - t[a];
    }
    if (wt == 0.0 || !g.in_storage(i)) continue;
    std::size_t id = g.index(i);
    if (!g.active(id) || g.kind(id) != NodeKind::Interior) continue;
    Vec gr = gradient_at(w, i, 1);
    for (int a = 0; a < d; ++a) acc[a] += wt * gr[a];
    wsum += wt;
  }
  if (wsum <= 0.0) {
    double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan, nan};
  }
  return scale(acc, 1.0 / wsum);
}

Eigen::VectorXd least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  return A.colPivHouseholderQr().solve(b);
}

}  // namespace

std::vector<double> geometric_radii(double rmin, double rmax, double ratio) {
  require(ratio > 1.0 && rmin > 0.0, ErrorCode::InvalidArgument, "geometric_radii: bad range");
  std::vector<double> out;
  for (double r = rmax; r >= rmin * (1.0 - 1e-9); r /= ratio) out.push_back(r);
  return out;
}

VanishingOrderEstimate vanishing_order(const Field& w, const Vec& x0, std::vector<double> radii) {
  const Grid& g = *w.grid;
  const int n = g.n();
  VanishingOrderEstimate est;
  est.x0 = x0;
  if (radii.empty()) {
    double rmax = std::min(0.25, 0.5 * (1.0 - norm(x0)));
    radii = geometric_radii(4.0 * g.h(), rmax);
  }
  require(radii.size() >= 4, ErrorCode::Precondition, "vanishing_order: fewer than 4 dyadic radii fit in [4h, 1/4]");
  est.radii = radii;
  std::vector<double> lx, ly;
  bool any = false;
  for (double r : radii) {
    double a = annulus_norm(w, x0, r);
    est.norms.push_back(a);
    if (a > 1e-300) {
      any = true;
      lx.push_back(std::log(r));
      ly.push_back(std::log(std::pow(r, -0.5 * (n + 1)) * a));
    }
  }
  if (!any) {
    est.infinite = true;
    est.kappa = std::numeric_limits<double>::infinity();
    return est;
  }
  require(lx.size() == radii.size(), ErrorCode::Numerical, "vanishing_order: annulus norm vanishes at some radii");
  LinearFit lf = linear_fit(lx, ly);
  est.kappa = lf.slope;
  est.r2 = lf.r2;
  est.trusted = lf.r2 >= 0.95;
  return est;
}

BlowupField blowup(const Field& w, const Vec& x0, double r, int unit_inv_h) {
  const Grid& g = *w.grid;
  const int n = g.n();
  require(r >= 8.0 * g.h() - 1e-12, ErrorCode::Precondition, "blowup: r must be >= 8h");
  require(norm(x0) + r <= 1.0 + 1e-12, ErrorCode::Precondition, "blowup: B_r(x0) leaves the domain");
  require(unit_inv_h >= 4, ErrorCode::InvalidArgument, "blowup: unit grid too coarse");
  BlowupField b;
  b.x0 = x0;
  b.r = r;
  b.scale = std::pow(r, -0.5 * (n + 1)) * ball_norm(w, x0, r);
  require(b.scale > 1e-300, ErrorCode::Numerical, "blowup: L2 norm underflow");
  auto ug = std::make_shared<const Grid>(GridSpec{g.dim(), unit_inv_h, true});
  b.w_r = Field(ug, w.mode);
  for (std::size_t id : ug->active_nodes()) {
    double v = interpolate(w, add(x0, scale(ug->point(id), r)));
    b.w_r.v[id] = std::isnan(v) ? 0.0 : v / b.scale;
  }
  double un = ball_norm(b.w_r, {0, 0, 0}, 1.0);
  require(un > 1e-300, ErrorCode::Numerical, "blowup: L2 norm underflow");
  for (double& v : b.w_r.v) v /= un;
  return b;
}

ModelDistance c1_distance_to_model(const Field& w, const Vec& x0, double r, double margin) {
  const Grid& g = *w.grid;
  const int d = g.dim();
  const int na = d - 1;
  const int n = g.n();
  const double h = g.h();
  require(r >= 8.0 * h - 1e-12, ErrorCode::Precondition, "blowup: r must be >= 8h");
  require(norm(x0) + r <= 1.0 + 1e-12, ErrorCode::Precondition, "blowup: B_r(x0) leaves the domain");
  require(std::abs(x0[na]) < 1e-12, ErrorCode::Precondition, "blowup: center must lie on the thin plane");
  const double S = std::pow(r, -0.5 * (n + 1)) * ball_norm(w, x0, r);
  require(S > 1e-300, ErrorCode::Numerical, "blowup: L2 norm underflow");
  const double cn = normalization_constant(n);
  const double hu = h / r;

  // Native samples: value, gradient of w_r, and the stencil points in y.
  struct Node {
    Vec y;
    double v;
    Vec grad;
    bool plane;
  };
  std::vector<Node> nodes;
  const double rin = r * (1.0 - margin);
  for (std::size_t id : g.active_nodes()) {
    if (g.kind(id) != NodeKind::Interior) continue;
    Idx i = g.multi(id);
    if (i[na] < 0) continue;
    Vec x = g.point(i);
    if (norm(sub(x, x0)) > rin) continue;
    Vec gr = gradient_at(w, i, 1);
    nodes.push_back({scale(sub(x, x0), 1.0 / r), w.v[id] / S, scale(gr, r / S), i[na] == 0});
  }
  require(!nodes.empty(), ErrorCode::Precondition, "blowup: no nodes in the ball");

  auto model = [&](const Vec& nu, const Vec& y) { return cn * eval_profile(ProfileKind::W32, dot(y, nu), y[na]); };
  auto distance_for = [&](const Vec& nu) {
    double s0 = 0.0, s1 = 0.0;
    for (const Node& q : nodes) {
      double m0 = model(nu, q.y);
      s0 = std::max(s0, std::abs(q.v - m0));
      double e2 = 0.0;
      for (int a = 0; a < d; ++a) {
        Vec yp = q.y, ym = q.y;
        double gm;
        if (a == na && q.plane) {
          yp[a] += hu;
          ym[a] += 2 * hu;
          gm = (-3.0 * m0 + 4.0 * model(nu, yp) - model(nu, ym)) / (2.0 * hu);
        } else {
          yp[a] += hu;
          ym[a] -= hu;
          gm = (model(nu, yp) - model(nu, ym)) / (2.0 * hu);
        }
        double dg = q.grad[a] - gm;
        e2 += dg * dg;
      }
      s1 = std::max(s1, std::sqrt(e2));
    }
    return s0 + s1;
  };

  ModelDistance best;
  best.distance = std::numeric_limits<double>::infinity();
  if (d == 2) {
    for (int s = -1; s <= 1; s += 2) {
      Vec nu{static_cast<double>(s), 0, 0};
      double dist = distance_for(nu);
      if (dist < best.distance) best = {dist, nu, s > 0 ? 0.0 : 180.0};
    }
  } else {
    for (int deg = 0; deg < 360; ++deg) {
      double th = deg * kPi / 180.0;
      Vec nu{std::cos(th), std::sin(th), 0};
      double dist = distance_for(nu);
      if (dist < best.distance) best = {dist, nu, static_cast<double>(deg)};
    }
  }
  return best;
}

ExpansionFit fit_expansion(const Field& w, const Vec& x0, const AsymptoticFrame& frame, double kappa,
                           const ExpansionOptions& opt) {
  const Grid& g = *w.grid;
  const int d = g.dim();
  const int n = g.n();
  require(std::isfinite(kappa) && kappa >= opt.kappa_lo && kappa <= opt.kappa_hi, ErrorCode::Precondition,
          "fit_expansion: vanishing order outside the regular window");
  require(frame.c1 > 0 && frame.c2 > 0 && std::abs(norm(frame.nu) - 1.0) < 1e-9, ErrorCode::InvalidArgument,
          "fit_expansion: invalid frame");
  require(opt.n_radii >= 4 && opt.n_angles >= 3, ErrorCode::InvalidArgument, "fit_expansion: too few samples");
  const double cn = normalization_constant(n);
  const double rho_max = std::min(opt.radius, 1.0 - norm(x0) - 2.0 * g.h());
  const double rho_min = opt.rho_min_cells * g.h();
  require(rho_max > 2.0 * rho_min, ErrorCode::Precondition, "fit_expansion: sampling radius too small for the mesh");

  struct Sample {
    double rho, t1, t2, mod, arg, w;
    Vec grad;
  };
  Vec en{0, 0, 0};
  en[d - 1] = 1.0;
  auto radius_of = [&](int j) {
    return rho_min * std::pow(rho_max / rho_min, static_cast<double>(j) / (opt.n_radii - 1));
  };
  auto sample_at = [&](const Vec& c) {
    std::vector<Sample> out;
    for (int j = 0; j < opt.n_radii; ++j) {
      double rho = radius_of(j);
      for (int k = 0; k < opt.n_angles; ++k) {
        double th = kPi * k / (opt.n_angles - 1);
        Vec x = add(c, add(scale(frame.nu, rho * std::cos(th)), scale(en, rho * std::sin(th))));
        x[d - 1] = std::max(0.0, x[d - 1]);
        Sample s;
        s.rho = rho;
        s.t1 = rho * std::cos(th) / frame.c1;
        s.t2 = x[d - 1] / frame.c2;
        s.mod = std::hypot(s.t1, s.t2);
        s.arg = std::atan2(s.t2, s.t1);
        s.w = interpolate(w, x);
        s.grad = interpolate_gradient(w, x);
        if (std::isnan(s.w) || std::isnan(s.grad[0])) continue;
        out.push_back(s);
      }
    }
    require(out.size() >= 16, ErrorCode::Precondition, "fit_expansion: too few valid samples");
    return out;
  };
  const int extra = opt.higher_order ? 3 : 0;
  const int dext = opt.higher_order ? 4 : 0;

  ExpansionFit fit;
  fit.frame = frame;
  fit.kappa = kappa;

  // w ~ a c_n Re zeta^{3/2} [+ b~ x_{n+1}] + k c_n Re zeta^{1/2} [+ |zeta|^{5/2} cos((2j+1) arg / 2)].
  // The Re zeta^{1/2} column is the first-order translation of the profile
  // along nu; the center is moved until that shift vanishes.
  std::vector<Sample> S;
  Vec center = x0;
  double bt = 0.0;
  for (int it = 0; it <= opt.recenter_iterations; ++it) {
    S = sample_at(center);
    const Eigen::Index m = static_cast<Eigen::Index>(S.size());
    const bool shift = opt.recenter_iterations > 0;
    int cols = 1 + (opt.interior ? 1 : 0) + (shift ? 1 : 0) + extra;
    Eigen::MatrixXd A(m, cols);
    Eigen::VectorXd y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Sample& q = S[i];
      int c = 0;
      A(i, c++) = cn * eval_profile(ProfileKind::W32, q.t1, q.t2);
      if (opt.interior) A(i, c++) = q.t2 * frame.c2;
      if (shift) A(i, c++) = cn * eval_profile(ProfileKind::W12, q.t1, q.t2);
      for (int j = 0; j < extra; ++j) A(i, c++) = std::pow(q.mod, 2.5) * std::cos((2 * j + 1) * q.arg / 2);
      y(i) = q.w;
    }
    Eigen::VectorXd coef = least_squares(A, y);
    fit.a = coef(0);
    bt = opt.interior ? coef(1) : 0.0;
    if (!shift || it == opt.recenter_iterations || fit.a <= 0.0) break;
    // w(x) = a P(x - delta nu) ~ a P - a delta (3/2) c_n Re zeta^{1/2} / c1
    double delta = -coef(opt.interior ? 2 : 1) * frame.c1 / (1.5 * fit.a);
    delta = std::clamp(delta, -2.0 * g.h(), 2.0 * g.h());
    center = add(center, scale(frame.nu, delta));
    if (std::abs(delta) < 1e-4 * g.h()) {
      S = sample_at(center);
      break;
    }
  }
  fit.frame.x0 = center;
  fit.center_shift = norm(sub(center, x0));

  // Residual of the leading term, shell by shell. The regression only uses
  // shells above the discretization floor (3x the smallest shell residual).
  {
    std::vector<double> lx, ly;
    double floor = std::numeric_limits<double>::infinity();
    for (int j = 0; j < opt.n_radii; ++j) {
      double rho = radius_of(j), worst = 0.0;
      bool have = false;
      for (const Sample& q : S) {
        if (std::abs(q.rho - rho) > 1e-12 * rho) continue;
        have = true;
        double lead = fit.a * cn * eval_profile(ProfileKind::W32, q.t1, q.t2) + bt * q.t2 * frame.c2;
        worst = std::max(worst, std::abs(q.w - lead));
      }
      if (!have) continue;
      fit.shell_radii.push_back(rho);
      fit.shell_residual.push_back(worst);
      floor = std::min(floor, worst);
    }
    fit.residual_floor = floor;
    for (std::size_t j = 0; j < fit.shell_radii.size(); ++j)
      if (fit.shell_residual[j] >= 3.0 * floor && fit.shell_residual[j] > 1e-300) {
        lx.push_back(std::log(fit.shell_radii[j]));
        ly.push_back(std::log(fit.shell_residual[j]));
      }
    if (lx.size() >= 4) {
      LinearFit lf = linear_fit(lx, ly);
      fit.residual_exponent = lf.slope;
      fit.residual_r2 = lf.r2;
      fit.residual_shells = static_cast<int>(lx.size());
    } else {
      // The residual never rises clearly above the floor.
      fit.residual_exponent = std::numeric_limits<double>::infinity();
      fit.residual_r2 = 0.0;
      fit.residual_shells = static_cast<int>(lx.size());
    }
  }
  const Eigen::Index m = static_cast<Eigen::Index>(S.size());

  // Directional derivatives against c_n w12 (tangential) and c_n w12bar (normal).
  auto fit_derivative = [&](const Vec& e, bool normal, double* bt) {
    int cols = 1 + ((normal && opt.interior) ? 1 : 0) + dext;
    Eigen::MatrixXd A(m, cols);
    Eigen::VectorXd y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Sample& s = S[i];
      int c = 0;
      A(i, c++) = cn * eval_profile(normal ? ProfileKind::W12Bar : ProfileKind::W12, s.t1, s.t2);
      if (normal && opt.interior) A(i, c++) = 1.0;
      for (int j = 0; j < dext; ++j) {
        double ang = (2 * j + 1) * s.arg / 2;
        A(i, c++) = std::pow(s.mod, 1.5) * (normal ? std::sin(ang) : std::cos(ang));
      }
      y(i) = dot(s.grad, e);
    }
    Eigen::VectorXd coef = least_squares(A, y);
    if (bt) *bt = (normal && opt.interior) ? coef(1) : 0.0;
    return coef(0);
  };

  fit.dirs.push_back(frame.nu);
  for (int a = 0; a < n; ++a) {
    Vec e{0, 0, 0};
    e[a] = 1.0;
    fit.dirs.push_back(e);
  }
  for (const Vec& e : fit.dirs) fit.b_e.push_back(fit_derivative(e, false, nullptr));
  fit.b_nu = fit.b_e[0];
  fit.b_np1 = fit_derivative(en, true, &fit.b_tilde);
  return fit;
}

CompatibilityReport check_compatibility(const ExpansionFit& fit) {
  CompatibilityReport rep;
  const double c1 = fit.frame.c1, c2 = fit.frame.c2;
  double lhs = fit.b_nu * c1, rhs = fit.b_np1 * c2;
  double den = std::max(std::abs(lhs), std::abs(rhs));
  rep.curl_defect = den > 0 ? std::abs(lhs - rhs) / den : 0.0;
  rep.defa_defect = fit.a != 0.0 ? std::abs(fit.a - 2.0 * fit.b_np1 * c2 / 3.0) / std::abs(fit.a)
                                 : std::numeric_limits<double>::infinity();
  // Directions nearly orthogonal to nu have b_e ~ 0; fall back to the natural
  // scale (3/2) a / c1 there.
  const double unit = 1.5 * std::abs(fit.a) / c1;
  for (std::size_t k = 0; k < fit.dirs.size(); ++k) {
    double pred = 1.5 * fit.a * dot(fit.dirs[k], fit.frame.nu) / c1;
    double scale_e = std::max(std::abs(fit.b_e[k]), unit);
    rep.direction_defects.push_back(scale_e > 0 ? std::abs(fit.b_e[k] - pred) / scale_e : 0.0);
  }
  return rep;
}

std::vector<GrowthReport> growth_exponents(const Field& w, const SlitSet& slit, const GraphFit* gf,
                                           const std::vector<Vec>& centers, const GrowthOptions& opt) {
  const Grid& g = *w.grid;
  const int d = g.dim();
  const int n = g.n();
  const double h = g.h();
  const double ell0 = opt.ell0 > 0 ? opt.ell0 : 1.0 / (16.0 * std::sqrt(static_cast<double>(n)));
  std::vector<GrowthReport> out;
  for (const Vec& x0 : centers) {
    GrowthReport rep;
    rep.x0 = x0;
    double rmax = std::min(opt.rmax, 1.0 - norm(x0) - h);
    rep.radii = geometric_radii(opt.rmin_cells * h, rmax, opt.ratio);
    require(rep.radii.size() >= 3, ErrorCode::Precondition, "growth_exponents: radius range too small");
    const std::size_t R = rep.radii.size();
    rep.sup_w.assign(R, 0.0);
    rep.sup_grad.assign(R, 0.0);
    Vec e{0, 0, 0};
    if (gf && !gf->g.empty())
      e = gf->normal(gf->column_near(x0));
    else
      e[d - 2] = 1.0;
    double cone = std::numeric_limits<double>::infinity();

    Idx lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < d; ++a) {
      lo[a] = std::max(g.lo(a), static_cast<int>(std::floor((x0[a] - rmax) / h)));
      hi[a] = std::min(g.hi(a), static_cast<int>(std::ceil((x0[a] + rmax) / h)));
    }
    if (g.half()) lo[d - 1] = std::max(lo[d - 1], 0);
    Idx i = lo;
    while (true) {
      std::size_t id = g.index(i);
      if (g.active(id)) {
        Vec x = g.point(i);
        double dist = norm(sub(x, x0));
        if (dist < rmax) {
          double av = std::abs(w.v[id]);
          bool interior = g.kind(id) == NodeKind::Interior;
          Vec gr{0, 0, 0};
          if (interior) gr = gradient_at(w, i, 1);
          double ag = norm(gr);
          for (std::size_t k = 0; k < R; ++k) {
            if (dist >= rep.radii[k]) break;
            rep.sup_w[k] = std::max(rep.sup_w[k], av);
            if (interior) rep.sup_grad[k] = std::max(rep.sup_grad[k], ag);
          }
          if (interior && !slit.dist_gamma.empty() && x[d - 1] >= 0.0) {
            double dg = slit.dist_gamma[id], dl = slit.dist_lambda[id];
            if (dg >= 2.0 * h && dl >= ell0 * dg) cone = std::min(cone, dot(gr, e) / std::sqrt(dg));
          }
        }
      }
      int a = d - 1;
      while (a >= 0 && ++i[a] > hi[a]) {
        i[a] = lo[a];
        --a;
      }
      if (a < 0) break;
    }
    std::vector<double> lr, lw, lg;
    for (std::size_t k = 0; k < R; ++k) {
      if (rep.sup_w[k] <= 0.0 || rep.sup_grad[k] <= 0.0) continue;
      lr.push_back(std::log(rep.radii[k]));
      lw.push_back(std::log(rep.sup_w[k]));
      lg.push_back(std::log(rep.sup_grad[k]));
    }
    require(lr.size() >= 3, ErrorCode::Numerical, "growth_exponents: solution vanishes near the center");
    LinearFit fw = linear_fit(lr, lw), fg = linear_fit(lr, lg);
    rep.slope_w = fw.slope;
    rep.r2_w = fw.r2;
    rep.slope_grad = fg.slope;
    rep.r2_grad = fg.r2;
    rep.cone_lower_ratio = std::isfinite(cone) ? cone : 0.0;
    out.push_back(rep);
  }
  return out;
}

double holder_seminorm_gradient(const Field& w, const Vec& center, double radius, double exponent,
                                double band_lo, double band_hi) {
  const Grid& g = *w.grid;
  const int d = g.dim();
  const double h = g.h();
  require(exponent > 0.0 && exponent <= 1.0, ErrorCode::InvalidArgument, "holder exponent must lie in (0, 1]");
  require(radius > 0.0, ErrorCode::InvalidArgument, "holder region radius must be positive");
  band_lo = std::max(band_lo, 4.0 * h);

  // Region nodes and their gradients in a dense local box.
  Idx lo{0, 0, 0}, ext{1, 1, 1};
  for (int a = 0; a < d; ++a) {
    lo[a] = std::max(g.lo(a), static_cast<int>(std::floor((center[a] - radius) / h)));
    int hi = std::min(g.hi(a), static_cast<int>(std::ceil((center[a] + radius) / h)));
    if (a == d - 1) lo[a] = std::max(lo[a], 0);
    ext[a] = hi - lo[a] + 1;
  }
  const std::size_t total = static_cast<std::size_t>(ext[0]) * ext[1] * ext[2];
  std::vector<Vec> grad(total);
  std::vector<std::uint8_t> in(total, 0);
  auto local = [&](const Idx& i) {
    return (static_cast<std::size_t>(i[0] - lo[0]) * ext[1] + (i[1] - lo[1])) * ext[2] + (i[2] - lo[2]);
  };
  std::vector<Idx> nodes;
  Idx i = lo;
  Idx hiI{lo[0] + ext[0] - 1, lo[1] + ext[1] - 1, lo[2] + ext[2] - 1};
  while (true) {
    std::size_t id = g.index(i);
    if (g.active(id) && g.kind(id) == NodeKind::Interior && norm(sub(g.point(i), center)) <= radius) {
      std::size_t l = local(i);
      in[l] = 1;
      grad[l] = gradient_at(w, i, 1);
      nodes.push_back(i);
    }
    int a = d - 1;
    while (a >= 0 && ++i[a] > hiI[a]) {
      i[a] = lo[a];
      --a;
    }
    if (a < 0) break;
  }

  // Lattice offsets along axis and diagonal directions, lengths spaced by 2^{1/4}.
  std::vector<Idx> dirs;
  Idx dv{0, 0, 0};
  for (dv[0] = -1; dv[0] <= 1; ++dv[0])
    for (dv[1] = (d >= 2 ? -1 : 0); dv[1] <= (d >= 2 ? 1 : 0); ++dv[1])
      for (dv[2] = (d >= 3 ? -1 : 0); dv[2] <= (d >= 3 ? 1 : 0); ++dv[2]) {
        // keep one of each +/- pair: first nonzero component positive
        int first = 0;
        for (int a = 0; a < 3 && first == 0; ++a) first = dv[a];
        if (first > 0) dirs.push_back(dv);
      }
  std::vector<Idx> offsets;
  for (const Idx& dir : dirs) {
    double unit = std::sqrt(static_cast<double>(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2])) * h;
    int prev = 0;
    for (double L = band_lo; L <= std::min(band_hi, 2.0 * radius) * (1 + 1e-12); L *= std::pow(2.0, 0.25)) {
      int k = static_cast<int>(std::ceil(L / unit - 1e-9));
      if (k == prev) continue;
      if (k * unit > band_hi * (1 + 1e-12)) break;
      prev = k;
      offsets.push_back({dir[0] * k, dir[1] * k, dir[2] * k});
    }
  }

  double best = 0.0;
  for (const Idx& x : nodes) {
    const Vec& gx = grad[local(x)];
    for (const Idx& o : offsets) {
      Idx y{x[0] + o[0], x[1] + o[1], x[2] + o[2]};
      bool ok = true;
      for (int a = 0; a < d && ok; ++a) ok = y[a] >= lo[a] && y[a] < lo[a] + ext[a];
      if (!ok) continue;
      std::size_t l = local(y);
      if (!in[l]) continue;
      double dist = h * std::sqrt(static_cast<double>(o[0] * o[0] + o[1] * o[1] + o[2] * o[2]));
      best = std::max(best, norm(sub(gx, grad[l])) / std::pow(dist, exponent));
    }
  }
  return best;
}

}  // namespace signorini
