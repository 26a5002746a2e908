#include "signorini/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace signorini {

double dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm(const Vec& a) { return std::sqrt(dot(a, a)); }
Vec sub(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec add(const Vec& a, const Vec& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
Vec scale(const Vec& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }

GridSpec parse_mesh(int dim, double h, bool half) {
  require(h > 0.0 && std::isfinite(h), ErrorCode::InvalidArgument, "mesh width must be positive");
  double inv = 1.0 / h;
  long r = std::lround(inv);
  if (r < 2 || std::abs(inv - static_cast<double>(r)) > 1e-9 * inv) {
    std::ostringstream os;
    os << "mesh width h=" << h << " does not divide 1 (1/h=" << inv << ")";
    fail(ErrorCode::InvalidArgument, os.str());
  }
  return GridSpec{dim, static_cast<int>(r), half};
}

const char* to_string(FieldMode m) {
  switch (m) {
    case FieldMode::BoundaryObstacle: return "boundary_obstacle";
    case FieldMode::InteriorObstacle: return "interior";
    case FieldMode::SplitComponent: return "split_component";
    case FieldMode::Auxiliary: return "auxiliary";
  }
  return "auxiliary";
}

Grid::Grid(const GridSpec& spec) : spec_(spec), h_(spec.h()) {
  require(spec.dim == 2 || spec.dim == 3, ErrorCode::InvalidArgument, "dim must be 2 or 3");
  require(spec.inv_h >= 2, ErrorCode::InvalidArgument, "1/h must be an integer >= 2");
  const int N = spec.inv_h;
  for (int a = 0; a < 3; ++a) {
    if (a < spec.dim) {
      lo_[a] = -N;
      hi_[a] = N;
      ext_[a] = 2 * N + 3;
    } else {
      lo_[a] = hi_[a] = 0;
      ext_[a] = 1;
    }
  }
  if (spec.half) {
    lo_[spec.dim - 1] = 0;
    ext_[spec.dim - 1] = N + 3;
  }
  stride_[2] = 1;
  stride_[1] = ext_[2];
  stride_[0] = static_cast<std::ptrdiff_t>(ext_[1]) * ext_[2];
  size_ = static_cast<std::size_t>(ext_[0]) * ext_[1] * ext_[2];
  kind_.assign(size_, 0);

  auto inside = [&](Idx i) {
    double r2 = 0.0;
    for (int a = 0; a < spec_.dim; ++a) {
      if (i[a] < -N || i[a] > N) return false;
      r2 += static_cast<double>(i[a]) * i[a];
    }
    return r2 <= static_cast<double>(N) * N * (1.0 + 1e-12);
  };
  const int d = spec_.dim;
  const int na = d - 1;
  Idx i{0, 0, 0};
  for (i[0] = lo_[0]; i[0] <= hi_[0]; ++i[0])
    for (i[1] = lo_[1]; i[1] <= hi_[1]; ++i[1])
      for (i[2] = lo_[2]; i[2] <= hi_[2]; ++i[2]) {
        if (!inside(i)) continue;
        bool interior = true;
        Idx j{0, 0, 0};
        int cnt = 1;
        for (int a = 0; a < d; ++a) cnt *= 3;
        for (int c = 0; c < cnt && interior; ++c) {
          int t = c;
          for (int a = 0; a < 3; ++a) {
            if (a < d) {
              j[a] = i[a] + (t % 3) - 1;
              t /= 3;
            } else {
              j[a] = 0;
            }
          }
          if (spec_.half && j[na] < 0) j[na] = -j[na];
          if (!inside(j)) interior = false;
        }
        std::size_t id = index(i);
        kind_[id] = static_cast<std::uint8_t>(interior ? NodeKind::Interior : NodeKind::Boundary);
        active_.push_back(id);
        if (i[na] == 0) plane_.push_back(id);
        if (!interior) boundary_.push_back(id);
      }
}

bool Grid::in_storage(const Idx& i) const {
  for (int a = 0; a < spec_.dim; ++a)
    if (i[a] < lo_[a] - 1 || i[a] > hi_[a] + 1) return false;
  return true;
}

std::size_t Grid::index(const Idx& i) const {
  std::ptrdiff_t o = 0;
  for (int a = 0; a < spec_.dim; ++a) o += (i[a] - lo_[a] + 1) * stride_[a];
  return static_cast<std::size_t>(o);
}

Idx Grid::multi(std::size_t id) const {
  Idx i{0, 0, 0};
  auto r = static_cast<std::ptrdiff_t>(id);
  for (int a = 0; a < spec_.dim; ++a) {
    std::ptrdiff_t q = r / stride_[a];
    r -= q * stride_[a];
    i[a] = static_cast<int>(q) + lo_[a] - 1;
  }
  return i;
}

Vec Grid::point(const Idx& i) const {
  Vec x{0, 0, 0};
  for (int a = 0; a < spec_.dim; ++a) x[a] = i[a] * h_;
  return x;
}

std::size_t Grid::canonical(Idx i) const {
  const int na = spec_.dim - 1;
  if (spec_.half && i[na] < 0) i[na] = -i[na];
  return index(i);
}

std::size_t Grid::reflect(std::size_t id) const {
  if (spec_.half) return id;
  Idx i = multi(id);
  i[spec_.dim - 1] = -i[spec_.dim - 1];
  return index(i);
}

std::size_t Grid::nearest_node(const Vec& x) const {
  Idx i{0, 0, 0};
  for (int a = 0; a < spec_.dim; ++a) i[a] = static_cast<int>(std::lround(x[a] / h_));
  const int na = spec_.dim - 1;
  if (spec_.half && i[na] < 0) i[na] = -i[na];
  for (int a = 0; a < spec_.dim; ++a)
    if (i[a] < lo_[a] || i[a] > hi_[a]) return npos;
  std::size_t id = index(i);
  return active(id) ? id : npos;
}

double Field::at(const Idx& i, int parity) const {
  const Grid& g = *grid;
  const int na = g.dim() - 1;
  if (g.half() && i[na] < 0) {
    Idx j = i;
    j[na] = -j[na];
    return parity * v[g.index(j)];
  }
  return v[g.index(i)];
}

namespace {

bool node_ok(const Grid& g, Idx i) {
  const int na = g.dim() - 1;
  if (g.half() && i[na] < 0) i[na] = -i[na];
  for (int a = 0; a < g.dim(); ++a)
    if (i[a] < g.lo(a) || i[a] > g.hi(a)) return false;
  return g.active(g.index(i));
}

}  // namespace

double interpolate(const Field& f, const Vec& x, int parity) {
  const Grid& g = *f.grid;
  const int d = g.dim();
  const double h = g.h();
  Idx base{0, 0, 0};
  Vec t{0, 0, 0};
  for (int a = 0; a < d; ++a) {
    double s = x[a] / h;
    int b = static_cast<int>(std::floor(s));
    b = std::clamp(b, -g.inv_h(), g.inv_h() - 1);
    base[a] = b;
    t[a] = std::clamp(s - b, 0.0, 1.0);
  }
  double num = 0.0, den = 0.0;
  for (int c = 0; c < (1 << d); ++c) {
    Idx j = base;
    double wgt = 1.0;
    for (int a = 0; a < d; ++a) {
      int bit = (c >> a) & 1;
      j[a] += bit;
      wgt *= bit ? t[a] : 1.0 - t[a];
    }
    if (wgt == 0.0 || !node_ok(g, j)) continue;
    num += wgt * f.at(j, parity);
    den += wgt;
  }
  if (den <= 1e-14) {
    // Exactly on a node with inactive neighbors: fall back to the node itself.
    std::size_t id = g.nearest_node(x);
    if (id != Grid::npos && norm(sub(g.point(id), x)) < 1e-12) return f.v[id];
    return std::numeric_limits<double>::quiet_NaN();
  }
  return num / den;
}

Vec gradient_at(const Field& f, const Idx& i, int side) {
  const Grid& g = *f.grid;
  const int d = g.dim();
  const int na = d - 1;
  const double h = g.h();
  Vec out{0, 0, 0};
  const double c = f.at(i);
  for (int a = 0; a < d; ++a) {
    Idx p = i, m = i;
    p[a] += 1;
    m[a] -= 1;
    if (a == na && i[na] == 0) {
      const int s = side >= 0 ? 1 : -1;
      Idx p1 = i, p2 = i;
      p1[a] += s;
      p2[a] += 2 * s;
      if (node_ok(g, p1) && node_ok(g, p2)) {
        out[a] = s * (-3.0 * c + 4.0 * f.at(p1) - f.at(p2)) / (2.0 * h);
      } else if (node_ok(g, p1)) {
        out[a] = s * (f.at(p1) - c) / h;
      }
      continue;
    }
    bool okp = node_ok(g, p), okm = node_ok(g, m);
    if (okp && okm) {
      out[a] = (f.at(p) - f.at(m)) / (2.0 * h);
    } else if (okp) {
      out[a] = (f.at(p) - c) / h;
    } else if (okm) {
      out[a] = (c - f.at(m)) / h;
    }
  }
  return out;
}

Vec gradient(const Field& f, std::size_t id, int side) { return gradient_at(f, f.grid->multi(id), side); }

bool cone_membership(const Vec& x, const Vec& apex, const Cone& cone, int dim) {
  Vec v = sub(x, apex);
  if (cone.flat && std::abs(v[dim - 1]) > 1e-12) return false;
  double along = dot(v, cone.axis);
  Vec orth = sub(v, scale(cone.axis, along));
  return along > cone.eta * norm(orth);
}

PointLocator::PointLocator(std::vector<Vec> pts, int dim) : pts_(std::move(pts)), dim_(dim) {
  require(!pts_.empty(), ErrorCode::Precondition, "distance target set is empty");
  Vec lo{0, 0, 0}, hi{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    lo[a] = hi[a] = pts_[0][a];
    for (const Vec& p : pts_) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  origin_ = lo;
  double vol = 1.0;
  int deff = 0;
  for (int a = 0; a < dim_; ++a)
    if (hi[a] - lo[a] > 1e-12) {
      vol *= hi[a] - lo[a];
      ++deff;
    }
  const double npts = static_cast<double>(pts_.size());
  cell_ = deff == 0 ? 1.0 : std::pow(vol / npts, 1.0 / deff) * 1.5;
  if (cell_ <= 0.0 || !std::isfinite(cell_)) cell_ = 1.0;
  std::size_t total = 1;
  for (int a = 0; a < 3; ++a) {
    cells_[a] = 1;
    if (a < dim_) {
      double e = hi[a] - lo[a];
      cells_[a] = std::clamp(static_cast<int>(e / cell_) + 1, 1, 2048);
    }
    total *= static_cast<std::size_t>(cells_[a]);
  }
  buckets_.assign(total, {});
  for (std::uint32_t k = 0; k < pts_.size(); ++k) {
    Idx c{0, 0, 0};
    for (int a = 0; a < dim_; ++a)
      c[a] = std::clamp(static_cast<int>((pts_[k][a] - origin_[a]) / cell_), 0, cells_[a] - 1);
    buckets_[bucket(c)].push_back(k);
  }
}

std::size_t PointLocator::bucket(const Idx& c) const {
  return (static_cast<std::size_t>(c[0]) * cells_[1] + c[1]) * cells_[2] + c[2];
}

std::size_t PointLocator::nearest(const Vec& q) const {
  Idx c{0, 0, 0};
  for (int a = 0; a < dim_; ++a)
    c[a] = std::clamp(static_cast<int>(std::floor((q[a] - origin_[a]) / cell_)), 0, cells_[a] - 1);
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  int maxR = std::max({cells_[0], cells_[1], cells_[2]});
  for (int R = 0; R <= maxR; ++R) {
    Idx lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::max(c[a] - R, 0);
      hi[a] = std::min(c[a] + R, cells_[a] - 1);
    }
    Idx j{0, 0, 0};
    for (j[0] = lo[0]; j[0] <= hi[0]; ++j[0])
      for (j[1] = lo[1]; j[1] <= hi[1]; ++j[1])
        for (j[2] = lo[2]; j[2] <= hi[2]; ++j[2]) {
          int cheb = std::max({std::abs(j[0] - c[0]), std::abs(j[1] - c[1]), std::abs(j[2] - c[2])});
          if (cheb != R) continue;
          for (std::uint32_t k : buckets_[bucket(j)]) {
            Vec dv = sub(pts_[k], q);
            double d2 = dot(dv, dv);
            if (d2 < best) {
              best = d2;
              arg = k;
            }
          }
        }
    // Lower bound on distance to any point outside the processed block.
    double lb = std::numeric_limits<double>::infinity();
    bool more = false;
    for (int a = 0; a < dim_; ++a) {
      if (c[a] - R > 0) {
        more = true;
        lb = std::min(lb, q[a] - (origin_[a] + (c[a] - R) * cell_));
      }
      if (c[a] + R < cells_[a] - 1) {
        more = true;
        lb = std::min(lb, origin_[a] + (c[a] + R + 1) * cell_ - q[a]);
      }
    }
    if (!more) break;
    if (std::isfinite(best) && lb > 0 && lb * lb >= best) break;
  }
  return arg;
}

double PointLocator::distance(const Vec& q) const { return norm(sub(pts_[nearest(q)], q)); }

std::vector<double> distance_field(const Grid& g, const std::vector<Vec>& target) {
  require(!target.empty(), ErrorCode::Precondition, "distance target set is empty");
  std::vector<double> out(g.size(), 0.0);
  const int na = g.normal_axis();
  bool planar = std::all_of(target.begin(), target.end(), [&](const Vec& p) { return std::abs(p[na]) < 1e-14; });
  PointLocator loc(target, g.dim());
  if (!planar) {
    for (std::size_t id : g.active_nodes()) out[id] = loc.distance(g.point(id));
    return out;
  }
  // Targets in the thin plane: dist^2 = dist'(x')^2 + x_{n+1}^2.
  std::vector<double> dp(g.size(), 0.0);
  for (std::size_t id : g.plane_nodes()) dp[id] = loc.distance(g.point(id));
  for (std::size_t id : g.active_nodes()) {
    Idx i = g.multi(id);
    double t = i[na] * g.h();
    i[na] = 0;
    double a = dp[g.index(i)];
    out[id] = std::sqrt(a * a + t * t);
  }
  return out;
}

std::vector<double> distance_field(const Grid& g, const std::vector<std::size_t>& target) {
  std::vector<Vec> pts;
  pts.reserve(target.size());
  for (std::size_t id : target) pts.push_back(g.point(id));
  return distance_field(g, pts);
}

double hausdorff_distance(const std::vector<Vec>& X, const std::vector<Vec>& Y, int dim) {
  require(!X.empty() && !Y.empty(), ErrorCode::Precondition, "hausdorff_distance: empty input");
  PointLocator lx(X, dim), ly(Y, dim);
  double d = 0.0;
  for (const Vec& p : X) d = std::max(d, ly.distance(p));
  for (const Vec& p : Y) d = std::max(d, lx.distance(p));
  return d;
}

double cell_l2(const Field& w, const Vec& lo, const Vec& hi, const std::function<bool(const Vec&)>& inside) {
  const Grid& g = *w.grid;
  const int d = g.dim();
  const int na = d - 1;
  const double h = g.h();
  Idx a0{0, 0, 0}, a1{0, 0, 0};
  for (int a = 0; a < d; ++a) {
    a0[a] = std::max(static_cast<int>(std::floor(lo[a] / h)) - 1, -g.inv_h());
    a1[a] = std::min(static_cast<int>(std::ceil(hi[a] / h)), g.inv_h() - 1);
  }
  a0[na] = std::max(a0[na], 0);
  double vol = std::pow(h, d);
  double sum = 0.0;
  Idx i{0, 0, 0};
  for (i[0] = a0[0]; i[0] <= a1[0]; ++i[0])
    for (i[1] = a0[1]; i[1] <= a1[1]; ++i[1])
      for (i[2] = a0[2]; i[2] <= a1[2]; ++i[2]) {
        Vec c{0, 0, 0};
        for (int a = 0; a < d; ++a) c[a] = (i[a] + 0.5) * h;
        if (!inside(c)) continue;
        double s = 0.0;
        bool ok = true;
        for (int k = 0; k < (1 << d) && ok; ++k) {
          Idx j = i;
          for (int a = 0; a < d; ++a) j[a] += (k >> a) & 1;
          std::size_t id = g.index(j);
          if (!g.active(id)) ok = false;
          else s += w.v[id];
        }
        if (!ok) continue;
        s /= (1 << d);
        sum += s * s * vol;
      }
  return std::sqrt(sum);
}

namespace {

void check_window(const Grid& g, const Vec& x0, double rout, double r) {
  require(r >= 2.0 * g.h() - 1e-12, ErrorCode::Precondition, "radius below 2h");
  require(rout <= 1.0 - norm(x0) + 1e-12, ErrorCode::Precondition, "ball leaves the unit ball");
}

}  // namespace

double annulus_norm(const Field& w, const Vec& x0, double r) {
  const Grid& g = *w.grid;
  check_window(g, x0, 2.0 * r, r);
  Vec lo = sub(x0, {2 * r, 2 * r, 2 * r}), hi = add(x0, {2 * r, 2 * r, 2 * r});
  bool any = false;
  double v = cell_l2(w, lo, hi, [&](const Vec& c) {
    double d = norm(sub(c, x0));
    bool in = d >= r && d < 2.0 * r;
    any = any || in;
    return in;
  });
  require(any, ErrorCode::Precondition, "annulus contains no grid cell");
  return v;
}

double ball_norm(const Field& w, const Vec& x0, double r) {
  Vec lo = sub(x0, {r, r, r}), hi = add(x0, {r, r, r});
  return cell_l2(w, lo, hi, [&](const Vec& c) { return norm(sub(c, x0)) < r; });
}

}  // namespace signorini
