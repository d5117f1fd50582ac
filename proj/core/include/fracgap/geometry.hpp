#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace fracgap {

/// Point in R^1 or R^2. In one dimension only the first coordinate is used
/// and the second is kept at zero.
using Point = std::array<double, 2>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Interval&) const = default;
};

struct Ball {
  Point center{};
  double radius = 0.0;
  bool operator==(const Ball&) const = default;
};

struct Box {
  Point lo{};
  Point hi{};
  bool operator==(const Box&) const = default;
};

/// Open box with a closed box removed, e.g. the L-shape (-1,1)^2 \ [0,1)^2.
struct BoxDifference {
  Box outer;
  Box hole;
  bool operator==(const BoxDifference&) const = default;
};

/// Union of lattice cells. Cell (ix, iy) covers
/// [origin + ix*h, origin + (ix+1)*h] x [origin + iy*h, origin + (iy+1)*h].
struct RasterMask {
  int dim = 1;
  double h = 0.0;
  int nx = 0;
  int ny = 1;
  Point origin{};
  std::vector<std::uint8_t> cells;  // row-major, ix fastest

  bool at(int ix, int iy) const {
    return ix >= 0 && iy >= 0 && ix < nx && iy < ny &&
           cells[static_cast<std::size_t>(iy) * nx + ix] != 0;
  }
  bool operator==(const RasterMask&) const = default;
};

/// Open bounded set D in R^1 or R^2.
class Domain {
 public:
  using Shape = std::variant<std::vector<Interval>, Ball, Box, std::vector<Ball>, BoxDifference, RasterMask>;

  /// Union of pairwise disjoint open intervals.
  static Domain intervals(std::vector<Interval> parts);
  static Domain interval(double lo, double hi) { return intervals({{lo, hi}}); }
  static Domain ball(int dim, Point center, double radius);
  static Domain box(int dim, Point lo, Point hi);
  /// Union of pairwise disjoint open balls.
  static Domain balls(int dim, std::vector<Ball> parts);
  static Domain box_difference(BoxDifference shape);
  /// (-1,1)^2 \ [0,1)^2.
  static Domain l_shape();
  static Domain raster(RasterMask mask);

  int dim() const { return dim_; }
  const Shape& shape() const { return shape_; }

  bool contains(const Point& p) const;
  /// Euclidean distance from p to the complement of D (0 outside D).
  double distance_to_complement(const Point& p) const;
  Box bounding_box() const;
  /// Lebesgue measure.
  double volume() const;
  std::string describe() const;

  bool operator==(const Domain&) const = default;

 private:
  Domain(int dim, Shape shape);
  int dim_ = 1;
  Shape shape_;
};

struct InscribedBall {
  double radius = 0.0;
  Point center{};
};

/// Sup of pairwise distances. Raster masks are padded by h*sqrt(d) so the
/// value is an upper bound on the diameter of the underlying set.
double diameter(const Domain& domain);

/// A ball contained in D. Exact (maximal) for intervals, balls and boxes;
/// for box differences and raster masks the largest ball found by
/// maximizing the distance to the complement over a sample.
InscribedBall inscribed_radius(const Domain& domain);

/// The dilation rD.
Domain dilate(const Domain& domain, double r);

/// Uniform lattice of cells over a padded bounding box of D, with a mask of
/// the cells whose centers lie in D ("inside nodes").
struct Grid {
  int dim = 1;
  double h = 0.0;
  Point origin{};                  // lower corner of cell (0, 0)
  std::array<int, 2> extent{1, 1};  // cells per axis; extent[1] == 1 in 1D
  std::vector<std::uint8_t> inside;      // per box cell
  std::vector<std::size_t> nodes;        // box index of each inside node
  std::vector<std::ptrdiff_t> node_of;   // box index -> node, or -1

  std::size_t size() const { return nodes.size(); }
  std::size_t box_cells() const { return inside.size(); }
  double cell_volume() const { return dim == 1 ? h : h * h; }
  double volume() const { return static_cast<double>(size()) * cell_volume(); }

  std::array<int, 2> cell_coords(std::size_t box_index) const {
    return {static_cast<int>(box_index % extent[0]), static_cast<int>(box_index / extent[0])};
  }
  Point center(std::size_t box_index) const {
    const auto c = cell_coords(box_index);
    Point p{origin[0] + (c[0] + 0.5) * h, 0.0};
    if (dim == 2) p[1] = origin[1] + (c[1] + 0.5) * h;
    return p;
  }
  Point node_center(std::size_t node) const { return center(nodes[node]); }
  /// Upper corner of the box.
  Point far_corner() const {
    return {origin[0] + extent[0] * h, dim == 2 ? origin[1] + extent[1] * h : 0.0};
  }
};

/// Cell-center rasterization of D at spacing h.
/// Requires 0 < h < diameter/4; raster masks only rasterize at their own h.
Grid rasterize(const Domain& domain, double h);

/// Reads the plain-text mask format: a header line "d h nx [ny]" followed
/// by ny rows of nx characters '0'/'1' (row k holds cells with iy = k).
/// The mask origin is placed at 0.
RasterMask read_raster_mask(std::istream& in);
RasterMask load_raster_mask(const std::string& path);
void write_raster_mask(std::ostream& out, const RasterMask& mask);

}  // namespace fracgap
