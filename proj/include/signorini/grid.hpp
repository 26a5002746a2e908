#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "signorini/error.hpp"

namespace signorini {

using Vec = std::array<double, 3>;
using Idx = std::array<int, 3>;

double dot(const Vec& a, const Vec& b);
double norm(const Vec& a);
Vec sub(const Vec& a, const Vec& b);
Vec add(const Vec& a, const Vec& b);
Vec scale(const Vec& a, double s);

// Uniform box grid of the unit ball (or upper half-ball). Axis dim-1 is the
// normal direction x_{n+1}; the thin space {x_{n+1} = 0} is the grid plane k = 0.
struct GridSpec {
  int dim = 2;
  int inv_h = 64;
  bool half = true;

  double h() const { return 1.0 / inv_h; }
};

GridSpec parse_mesh(int dim, double h, bool half);

enum class NodeKind : std::uint8_t { Outside = 0, Interior = 1, Boundary = 2 };

class Grid {
 public:
  explicit Grid(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  int dim() const { return spec_.dim; }
  int n() const { return spec_.dim - 1; }
  double h() const { return h_; }
  int inv_h() const { return spec_.inv_h; }
  bool half() const { return spec_.half; }
  int normal_axis() const { return spec_.dim - 1; }

  int lo(int axis) const { return lo_[axis]; }
  int hi(int axis) const { return hi_[axis]; }

  std::size_t size() const { return size_; }
  std::ptrdiff_t stride(int axis) const { return stride_[axis]; }

  // Storage is padded by one layer on every side; valid for lo-1 <= i <= hi+1.
  bool in_storage(const Idx& i) const;
  std::size_t index(const Idx& i) const;
  Idx multi(std::size_t id) const;
  Vec point(const Idx& i) const;
  Vec point(std::size_t id) const { return point(multi(id)); }

  // Half grids fold k < 0 onto the mirror node; full grids return index(i).
  std::size_t canonical(Idx i) const;
  // Mirror (x', x_{n+1}) -> (x', -x_{n+1}); identity on half grids' plane nodes.
  std::size_t reflect(std::size_t id) const;

  NodeKind kind(std::size_t id) const { return static_cast<NodeKind>(kind_[id]); }
  bool active(std::size_t id) const { return kind_[id] != 0; }
  bool on_plane(std::size_t id) const { return multi(id)[normal_axis()] == 0; }

  const std::vector<std::size_t>& active_nodes() const { return active_; }
  const std::vector<std::size_t>& plane_nodes() const { return plane_; }
  const std::vector<std::size_t>& boundary_nodes() const { return boundary_; }

  // Node nearest to x (rounded), or npos if outside storage / inactive.
  std::size_t nearest_node(const Vec& x) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  GridSpec spec_;
  double h_;
  Idx lo_{0, 0, 0}, hi_{0, 0, 0}, ext_{1, 1, 1};
  std::array<std::ptrdiff_t, 3> stride_{0, 0, 0};
  std::size_t size_ = 0;
  std::vector<std::uint8_t> kind_;
  std::vector<std::size_t> active_, plane_, boundary_;
};

using GridPtr = std::shared_ptr<const Grid>;

enum class FieldMode { BoundaryObstacle, InteriorObstacle, SplitComponent, Auxiliary };

const char* to_string(FieldMode m);

// Nodal scalar field. On half grids values below the plane are the even mirror
// (or odd, with parity -1).
struct Field {
  GridPtr grid;
  std::vector<double> v;
  FieldMode mode = FieldMode::Auxiliary;

  Field() = default;
  Field(GridPtr g, FieldMode m = FieldMode::Auxiliary)
      : grid(std::move(g)), v(grid->size(), 0.0), mode(m) {}

  double at(const Idx& i, int parity = 1) const;
  double operator[](std::size_t id) const { return v[id]; }
  double& operator[](std::size_t id) { return v[id]; }
};

template <class F>
Field sample(GridPtr g, F&& fn, FieldMode mode = FieldMode::Auxiliary) {
  Field out(g, mode);
  for (std::size_t id : g->active_nodes()) out.v[id] = fn(g->point(id));
  return out;
}

// Multilinear interpolation at x; inactive corners are dropped and the
// remaining weights renormalized. Returns NaN when no corner is active.
double interpolate(const Field& f, const Vec& x, int parity = 1);

// Discrete gradient at a node. Tangential components are central differences.
// The normal component is central off the plane; on the plane it is the
// second-order one-sided difference taken from the side `side` (+1 upper, -1 lower).
Vec gradient(const Field& f, std::size_t id, int side = 1);
Vec gradient_at(const Field& f, const Idx& i, int side = 1);

struct Cone {
  Vec axis{0, 0, 0};
  double eta = 1.0;
  bool flat = false;
};

bool cone_membership(const Vec& x, const Vec& apex, const Cone& cone, int dim);

// Nearest-point queries over a fixed point cloud (bucket grid).
class PointLocator {
 public:
  PointLocator(std::vector<Vec> pts, int dim);
  double distance(const Vec& q) const;
  std::size_t nearest(const Vec& q) const;
  const std::vector<Vec>& points() const { return pts_; }

 private:
  std::vector<Vec> pts_;
  int dim_;
  double cell_;
  Vec origin_{0, 0, 0};
  Idx cells_{1, 1, 1};
  std::vector<std::vector<std::uint32_t>> buckets_;
  std::size_t bucket(const Idx& c) const;
};

// Exact Euclidean distance from every active node to the target node set.
std::vector<double> distance_field(const Grid& g, const std::vector<std::size_t>& target);
std::vector<double> distance_field(const Grid& g, const std::vector<Vec>& target);

double hausdorff_distance(const std::vector<Vec>& X, const std::vector<Vec>& Y, int dim);

// Midpoint-rule L2 norm over cells of the (upper half) grid whose centers lie
// in the box [lo, hi] and satisfy the predicate. Cell value is the mean of its
// 2^d corners.
double cell_l2(const Field& w, const Vec& lo, const Vec& hi,
               const std::function<bool(const Vec&)>& inside);

double annulus_norm(const Field& w, const Vec& x0, double r);
double ball_norm(const Field& w, const Vec& x0, double r);

}  // namespace signorini
