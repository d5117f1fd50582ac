#include "fracgap/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "fracgap/constants.hpp"
#include "fracgap/error.hpp"

namespace fracgap {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double dist(const Point& a, const Point& b, int dim) {
  const double dx = a[0] - b[0];
  const double dy = dim == 2 ? a[1] - b[1] : 0.0;
  return std::hypot(dx, dy);
}

bool in_open_box(const Box& b, const Point& p, int dim) {
  for (int k = 0; k < dim; ++k) {
    if (!(p[k] > b.lo[k] && p[k] < b.hi[k])) return false;
  }
  return true;
}

bool in_closed_box(const Box& b, const Point& p, int dim) {
  for (int k = 0; k < dim; ++k) {
    if (p[k] < b.lo[k] || p[k] > b.hi[k]) return false;
  }
  return true;
}

// Distance from an interior point to the boundary of an open box.
double inner_box_distance(const Box& b, const Point& p, int dim) {
  double d = std::numeric_limits<double>::infinity();
  for (int k = 0; k < dim; ++k) d = std::min({d, p[k] - b.lo[k], b.hi[k] - p[k]});
  return std::max(d, 0.0);
}

// Distance from p to a closed box (0 inside it).
double outer_box_distance(const Box& b, const Point& p, int dim) {
  double s = 0.0;
  for (int k = 0; k < dim; ++k) {
    const double e = std::max({b.lo[k] - p[k], 0.0, p[k] - b.hi[k]});
    s += e * e;
  }
  return std::sqrt(s);
}

void check_box(const Box& b, int dim) {
  for (int k = 0; k < dim; ++k) {
    if (!(b.hi[k] > b.lo[k]) || !std::isfinite(b.lo[k]) || !std::isfinite(b.hi[k])) {
      throw InvalidArgument("box corners must satisfy lo < hi on every axis");
    }
  }
}

// Closed boxes whose union is the closure of outer \ hole.
std::vector<Box> decompose(const BoxDifference& s, int dim) {
  std::vector<Box> out;
  const Box& o = s.outer;
  Box h = s.hole;
  for (int k = 0; k < dim; ++k) {
    h.lo[k] = std::clamp(h.lo[k], o.lo[k], o.hi[k]);
    h.hi[k] = std::clamp(h.hi[k], o.lo[k], o.hi[k]);
  }
  auto push = [&](Box b) {
    for (int k = 0; k < dim; ++k) {
      if (!(b.hi[k] > b.lo[k])) return;
    }
    out.push_back(b);
  };
  if (dim == 1) {
    push({{o.lo[0], 0.0}, {h.lo[0], 0.0}});
    push({{h.hi[0], 0.0}, {o.hi[0], 0.0}});
    return out;
  }
  push({{o.lo[0], o.lo[1]}, {h.lo[0], o.hi[1]}});  // left strip
  push({{h.hi[0], o.lo[1]}, {o.hi[0], o.hi[1]}});  // right strip
  push({{h.lo[0], o.lo[1]}, {h.hi[0], h.lo[1]}});  // below the hole
  push({{h.lo[0], h.hi[1]}, {h.hi[0], o.hi[1]}});  // above the hole
  return out;
}

std::vector<Point> corners(const Box& b, int dim) {
  if (dim == 1) return {{b.lo[0], 0.0}, {b.hi[0], 0.0}};
  return {{b.lo[0], b.lo[1]}, {b.hi[0], b.lo[1]}, {b.lo[0], b.hi[1]}, {b.hi[0], b.hi[1]}};
}

double max_pairwise(const std::vector<Point>& pts, int dim) {
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::max(best, dist(pts[i], pts[j], dim));
  }
  return best;
}

// Largest sampled value of the distance to the complement, refined by a
// compass search around the best sample.
InscribedBall maximize_clearance(const Domain& dom, int samples) {
  const Box bb = dom.bounding_box();
  const int dim = dom.dim();
  InscribedBall best;
  const int ny = dim == 2 ? samples : 1;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < samples; ++i) {
      Point p{bb.lo[0] + (i + 0.5) * (bb.hi[0] - bb.lo[0]) / samples, 0.0};
      if (dim == 2) p[1] = bb.lo[1] + (j + 0.5) * (bb.hi[1] - bb.lo[1]) / samples;
      const double r = dom.distance_to_complement(p);
      if (r > best.radius) best = {r, p};
    }
  }
  double step = (bb.hi[0] - bb.lo[0]) / samples;
  while (step > 1e-12) {
    bool moved = false;
    static constexpr double kDiag = 0.70710678118654752;
    static constexpr std::array<Point, 8> kMoves{
        {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {kDiag, kDiag}, {kDiag, -kDiag}, {-kDiag, kDiag}, {-kDiag, -kDiag}}};
    const std::size_t nmoves = dim == 2 ? kMoves.size() : 2;
    for (std::size_t m = 0; m < nmoves; ++m) {
      const Point q{best.center[0] + step * kMoves[m][0], best.center[1] + step * kMoves[m][1]};
      const double r = dom.distance_to_complement(q);
      if (r > best.radius) {
        best = {r, q};
        moved = true;
      }
    }
    if (!moved) step /= 2.0;
  }
  return best;
}

}  // namespace

Domain::Domain(int dim, Shape shape) : dim_(dim), shape_(std::move(shape)) {
  if (dim_ != 1 && dim_ != 2) throw InvalidArgument("only dimensions 1 and 2 are supported");
  if (!(volume() > 0.0)) throw InvalidArgument("domain is empty");
}

Domain Domain::intervals(std::vector<Interval> parts) {
  if (parts.empty()) throw InvalidArgument("interval union needs at least one interval");
  for (const auto& iv : parts) {
    if (!(iv.hi > iv.lo) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi)) {
      throw InvalidArgument("interval endpoints must satisfy lo < hi");
    }
  }
  std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (std::size_t i = 1; i < parts.size(); ++i) {
    if (parts[i].lo < parts[i - 1].hi) throw InvalidArgument("intervals must be pairwise disjoint");
  }
  return Domain(1, std::move(parts));
}

Domain Domain::ball(int dim, Point center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("ball radius must be positive");
  if (dim == 1) center[1] = 0.0;
  return Domain(dim, Ball{center, radius});
}

Domain Domain::box(int dim, Point lo, Point hi) {
  if (dim == 1) lo[1] = hi[1] = 0.0;
  Box b{lo, hi};
  check_box(b, dim);
  return Domain(dim, b);
}

Domain Domain::balls(int dim, std::vector<Ball> parts) {
  if (parts.empty()) throw InvalidArgument("ball union needs at least one ball");
  for (auto& b : parts) {
    if (!(b.radius > 0.0) || !std::isfinite(b.radius)) throw InvalidArgument("ball radius must be positive");
    if (dim == 1) b.center[1] = 0.0;
  }
  for (std::size_t i = 0; i < parts.size(); ++i) {
    for (std::size_t j = i + 1; j < parts.size(); ++j) {
      if (dist(parts[i].center, parts[j].center, dim) < parts[i].radius + parts[j].radius) {
        throw InvalidArgument("balls must be pairwise disjoint");
      }
    }
  }
  return Domain(dim, std::move(parts));
}

Domain Domain::box_difference(BoxDifference shape) {
  check_box(shape.outer, 2);
  check_box(shape.hole, 2);
  return Domain(2, shape);
}

Domain Domain::l_shape() {
  return box_difference({{{-1.0, -1.0}, {1.0, 1.0}}, {{0.0, 0.0}, {1.0, 1.0}}});
}

Domain Domain::raster(RasterMask mask) {
  if (mask.dim != 1 && mask.dim != 2) throw InvalidArgument("raster mask dimension must be 1 or 2");
  if (mask.dim == 1) mask.ny = 1;
  if (!(mask.h > 0.0) || mask.nx < 1 || mask.ny < 1 ||
      mask.cells.size() != static_cast<std::size_t>(mask.nx) * mask.ny) {
    throw InvalidArgument("malformed raster mask");
  }
  const int dim = mask.dim;
  return Domain(dim, std::move(mask));
}

bool Domain::contains(const Point& p) const {
  const int d = dim_;
  return std::visit(
      overloaded{
          [&](const std::vector<Interval>& ivs) {
            return std::any_of(ivs.begin(), ivs.end(),
                               [&](const Interval& iv) { return p[0] > iv.lo && p[0] < iv.hi; });
          },
          [&](const Ball& b) { return dist(p, b.center, d) < b.radius; },
          [&](const Box& b) { return in_open_box(b, p, d); },
          [&](const std::vector<Ball>& bs) {
            return std::any_of(bs.begin(), bs.end(),
                               [&](const Ball& b) { return dist(p, b.center, d) < b.radius; });
          },
          [&](const BoxDifference& s) { return in_open_box(s.outer, p, d) && !in_closed_box(s.hole, p, d); },
          [&](const RasterMask& m) {
            const double fx = (p[0] - m.origin[0]) / m.h;
            const double fy = d == 2 ? (p[1] - m.origin[1]) / m.h : 0.0;
            if (fx < 0.0 || fy < 0.0) return false;
            return m.at(static_cast<int>(std::floor(fx)), static_cast<int>(std::floor(fy)));
          },
      },
      shape_);
}

double Domain::distance_to_complement(const Point& p) const {
  if (!contains(p)) return 0.0;
  const int d = dim_;
  return std::visit(
      overloaded{
          [&](const std::vector<Interval>& ivs) {
            for (const auto& iv : ivs) {
              if (p[0] > iv.lo && p[0] < iv.hi) return std::min(p[0] - iv.lo, iv.hi - p[0]);
            }
            return 0.0;
          },
          [&](const Ball& b) { return b.radius - dist(p, b.center, d); },
          [&](const Box& b) { return inner_box_distance(b, p, d); },
          [&](const std::vector<Ball>& bs) {
            double r = 0.0;
            for (const auto& b : bs) r = std::max(r, b.radius - dist(p, b.center, d));
            return r;
          },
          [&](const BoxDifference& s) {
            return std::min(inner_box_distance(s.outer, p, d), outer_box_distance(s.hole, p, d));
          },
          [&](const RasterMask& m) {
            Box full{m.origin, {m.origin[0] + m.nx * m.h, m.origin[1] + m.ny * m.h}};
            double r = inner_box_distance(full, p, d);
            for (int iy = 0; iy < m.ny; ++iy) {
              for (int ix = 0; ix < m.nx; ++ix) {
                if (m.at(ix, iy)) continue;
                Box cell{{m.origin[0] + ix * m.h, m.origin[1] + iy * m.h},
                         {m.origin[0] + (ix + 1) * m.h, m.origin[1] + (iy + 1) * m.h}};
                r = std::min(r, outer_box_distance(cell, p, d));
              }
            }
            return r;
          },
      },
      shape_);
}

Box Domain::bounding_box() const {
  const int d = dim_;
  Box bb = std::visit(
      overloaded{
          [&](const std::vector<Interval>& ivs) { return Box{{ivs.front().lo, 0.0}, {ivs.back().hi, 0.0}}; },
          [&](const Ball& b) {
            return Box{{b.center[0] - b.radius, b.center[1] - b.radius},
                       {b.center[0] + b.radius, b.center[1] + b.radius}};
          },
          [&](const Box& b) { return b; },
          [&](const std::vector<Ball>& bs) {
            const double inf = std::numeric_limits<double>::infinity();
            Box r{{inf, inf}, {-inf, -inf}};
            for (const auto& b : bs) {
              for (int k = 0; k < 2; ++k) {
                r.lo[k] = std::min(r.lo[k], b.center[k] - b.radius);
                r.hi[k] = std::max(r.hi[k], b.center[k] + b.radius);
              }
            }
            return r;
          },
          [&](const BoxDifference& s) { return s.outer; },
          [&](const RasterMask& m) {
            return Box{m.origin, {m.origin[0] + m.nx * m.h, m.origin[1] + m.ny * m.h}};
          },
      },
      shape_);
  if (d == 1) bb.lo[1] = bb.hi[1] = 0.0;
  return bb;
}

double Domain::volume() const {
  const int d = dim_;
  auto box_volume = [d](const Box& b) {
    double v = 1.0;
    for (int k = 0; k < d; ++k) v *= b.hi[k] - b.lo[k];
    return v;
  };
  return std::visit(
      overloaded{
          [&](const std::vector<Interval>& ivs) {
            double v = 0.0;
            for (const auto& iv : ivs) v += iv.hi - iv.lo;
            return v;
          },
          [&](const Ball& b) { return unit_ball_volume(d) * std::pow(b.radius, d); },
          [&](const Box& b) { return box_volume(b); },
          [&](const std::vector<Ball>& bs) {
            double v = 0.0;
            for (const auto& b : bs) v += unit_ball_volume(d) * std::pow(b.radius, d);
            return v;
          },
          [&](const BoxDifference& s) {
            double v = 0.0;
            for (const auto& b : decompose(s, d)) v += box_volume(b);
            return v;
          },
          [&](const RasterMask& m) {
            const auto count = std::count_if(m.cells.begin(), m.cells.end(), [](std::uint8_t c) { return c != 0; });
            return static_cast<double>(count) * std::pow(m.h, d);
          },
      },
      shape_);
}

std::string Domain::describe() const {
  std::ostringstream os;
  os.precision(12);
  const int d = dim_;
  auto pt = [&](const Point& p) {
    std::ostringstream s;
    s.precision(12);
    if (d == 1) {
      s << p[0];
    } else {
      s << "(" << p[0] << "," << p[1] << ")";
    }
    return s.str();
  };
  std::visit(overloaded{
                 [&](const std::vector<Interval>& ivs) {
                   os << "intervals";
                   for (const auto& iv : ivs) os << " (" << iv.lo << "," << iv.hi << ")";
                 },
                 [&](const Ball& b) { os << "ball center=" << pt(b.center) << " r=" << b.radius; },
                 [&](const Box& b) { os << "box " << pt(b.lo) << "-" << pt(b.hi); },
                 [&](const std::vector<Ball>& bs) {
                   os << "balls";
                   for (const auto& b : bs) os << " [" << pt(b.center) << " r=" << b.radius << "]";
                 },
                 [&](const BoxDifference& s) {
                   os << "box " << pt(s.outer.lo) << "-" << pt(s.outer.hi) << " minus " << pt(s.hole.lo) << "-"
                      << pt(s.hole.hi);
                 },
                 [&](const RasterMask& m) { os << "raster " << m.nx << "x" << m.ny << " h=" << m.h; },
             },
             shape_);
  return os.str();
}

double diameter(const Domain& domain) {
  const int d = domain.dim();
  return std::visit(
      overloaded{
          [&](const std::vector<Interval>& ivs) { return ivs.back().hi - ivs.front().lo; },
          [&](const Ball& b) { return 2.0 * b.radius; },
          [&](const Box& b) { return dist(b.lo, b.hi, d); },
          [&](const std::vector<Ball>& bs) {
            double best = 0.0;
            for (const auto& a : bs) {
              for (const auto& b : bs) best = std::max(best, dist(a.center, b.center, d) + a.radius + b.radius);
            }
            return best;
          },
          [&](const BoxDifference& s) {
            std::vector<Point> pts;
            for (const auto& b : decompose(s, d)) {
              for (const auto& c : corners(b, d)) pts.push_back(c);
            }
            return max_pairwise(pts, d);
          },
          [&](const RasterMask& m) {
            // The farthest pair of centers is attained on the convex hull, and
            // hull vertices are extreme cells of some row.
            std::vector<Point> pts;
            for (int iy = 0; iy < m.ny; ++iy) {
              int first = -1;
              int last = -1;
              for (int ix = 0; ix < m.nx; ++ix) {
                if (!m.at(ix, iy)) continue;
                if (first < 0) first = ix;
                last = ix;
              }
              if (first < 0) continue;
              for (int ix : {first, last}) {
                pts.push_back({m.origin[0] + (ix + 0.5) * m.h, d == 2 ? m.origin[1] + (iy + 0.5) * m.h : 0.0});
              }
            }
            return max_pairwise(pts, d) + m.h * std::sqrt(static_cast<double>(d));
          },
      },
      domain.shape());
}

InscribedBall inscribed_radius(const Domain& domain) {
  const int d = domain.dim();
  return std::visit(
      overloaded{
          [&](const std::vector<Interval>& ivs) {
            const Interval* best = &ivs.front();
            for (const auto& iv : ivs) {
              if (iv.hi - iv.lo > best->hi - best->lo) best = &iv;
            }
            return InscribedBall{(best->hi - best->lo) / 2.0, {(best->hi + best->lo) / 2.0, 0.0}};
          },
          [&](const Ball& b) { return InscribedBall{b.radius, b.center}; },
          [&](const Box& b) {
            double r = std::numeric_limits<double>::infinity();
            for (int k = 0; k < d; ++k) r = std::min(r, (b.hi[k] - b.lo[k]) / 2.0);
            return InscribedBall{r, {(b.lo[0] + b.hi[0]) / 2.0, (b.lo[1] + b.hi[1]) / 2.0}};
          },
          [&](const std::vector<Ball>& bs) {
            const Ball* best = &bs.front();
            for (const auto& b : bs) {
              if (b.radius > best->radius) best = &b;
            }
            return InscribedBall{best->radius, best->center};
          },
          [&](const BoxDifference&) { return maximize_clearance(domain, 200); },
          [&](const RasterMask& m) {
            InscribedBall best;
            for (int iy = 0; iy < m.ny; ++iy) {
              for (int ix = 0; ix < m.nx; ++ix) {
                if (!m.at(ix, iy)) continue;
                const Point c{m.origin[0] + (ix + 0.5) * m.h, d == 2 ? m.origin[1] + (iy + 0.5) * m.h : 0.0};
                const double r = domain.distance_to_complement(c);
                if (r > best.radius) best = {r, c};
              }
            }
            return best;
          },
      },
      domain.shape());
}

Domain dilate(const Domain& domain, double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("dilation factor must be positive");
  const int d = domain.dim();
  auto sp = [r](Point p) { return Point{p[0] * r, p[1] * r}; };
  return std::visit(
      overloaded{
          [&](const std::vector<Interval>& ivs) {
            std::vector<Interval> out;
            for (const auto& iv : ivs) out.push_back({iv.lo * r, iv.hi * r});
            return Domain::intervals(std::move(out));
          },
          [&](const Ball& b) { return Domain::ball(d, sp(b.center), b.radius * r); },
          [&](const Box& b) { return Domain::box(d, sp(b.lo), sp(b.hi)); },
          [&](const std::vector<Ball>& bs) {
            std::vector<Ball> out;
            for (const auto& b : bs) out.push_back({sp(b.center), b.radius * r});
            return Domain::balls(d, std::move(out));
          },
          [&](const BoxDifference& s) {
            return Domain::box_difference({{sp(s.outer.lo), sp(s.outer.hi)}, {sp(s.hole.lo), sp(s.hole.hi)}});
          },
          [&](const RasterMask& m) {
            RasterMask out = m;
            out.h = m.h * r;
            out.origin = sp(m.origin);
            return Domain::raster(std::move(out));
          },
      },
      domain.shape());
}

Grid rasterize(const Domain& domain, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("grid spacing must be positive");
  if (!(h < diameter(domain) / 4.0)) throw InvalidArgument("grid spacing must be below diameter/4");

  Grid g;
  g.dim = domain.dim();
  g.h = h;
  if (const auto* m = std::get_if<RasterMask>(&domain.shape())) {
    if (std::abs(m->h - h) > 1e-12 * m->h) {
      throw InvalidArgument("raster masks can only be rasterized at their own spacing");
    }
    g.origin = {m->origin[0] - h, g.dim == 2 ? m->origin[1] - h : 0.0};
    g.extent = {m->nx + 2, g.dim == 2 ? m->ny + 2 : 1};
  } else {
    const Box bb = domain.bounding_box();
    std::array<long, 2> k0{0, 0};
    for (int k = 0; k < g.dim; ++k) {
      k0[k] = static_cast<long>(std::floor(bb.lo[k] / h)) - 1;
      const long k1 = static_cast<long>(std::ceil(bb.hi[k] / h)) + 1;
      g.extent[k] = static_cast<int>(k1 - k0[k]);
      g.origin[k] = static_cast<double>(k0[k]) * h;
    }
  }

  const std::size_t cells = static_cast<std::size_t>(g.extent[0]) * g.extent[1];
  g.inside.assign(cells, 0);
  g.node_of.assign(cells, -1);
  for (std::size_t b = 0; b < cells; ++b) {
    const auto c = g.cell_coords(b);
    Point p{g.origin[0] + (c[0] + 0.5) * h, 0.0};
    if (g.dim == 2) p[1] = g.origin[1] + (c[1] + 0.5) * h;
    if (domain.contains(p)) {
      g.inside[b] = 1;
      g.node_of[b] = static_cast<std::ptrdiff_t>(g.nodes.size());
      g.nodes.push_back(b);
    }
  }
  if (g.nodes.empty()) throw GeometryError("no cell center falls inside the domain");
  if (g.nodes.size() < 2) throw GeometryError("grid has fewer than 2 inside cells; refine h");
  return g;
}

RasterMask read_raster_mask(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw InvalidArgument("raster mask: missing header line");
  std::istringstream hs(header);
  RasterMask m;
  if (!(hs >> m.dim >> m.h >> m.nx)) throw InvalidArgument("raster mask: header must be 'd h nx [ny]'");
  if (m.dim == 2) {
    if (!(hs >> m.ny)) throw InvalidArgument("raster mask: 2D header needs ny");
  } else {
    m.ny = 1;
  }
  if (m.dim != 1 && m.dim != 2) throw InvalidArgument("raster mask: d must be 1 or 2");
  if (!(m.h > 0.0) || m.nx < 1 || m.ny < 1) throw InvalidArgument("raster mask: bad header values");
  m.cells.reserve(static_cast<std::size_t>(m.nx) * m.ny);
  std::string line;
  int rows = 0;
  while (rows < m.ny && std::getline(in, line)) {
    std::size_t count = 0;
    for (char ch : line) {
      if (ch == '0' || ch == '1') {
        m.cells.push_back(ch == '1' ? 1 : 0);
        ++count;
      } else if (ch != ' ' && ch != '\t' && ch != '\r') {
        throw InvalidArgument(std::string("raster mask: unexpected character '") + ch + "'");
      }
    }
    if (count == 0) continue;
    if (count != static_cast<std::size_t>(m.nx)) throw InvalidArgument("raster mask: row length differs from nx");
    ++rows;
  }
  if (rows != m.ny) throw InvalidArgument("raster mask: expected " + std::to_string(m.ny) + " rows");
  return m;
}

RasterMask load_raster_mask(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open raster mask file " + path);
  return read_raster_mask(in);
}

void write_raster_mask(std::ostream& out, const RasterMask& mask) {
  out.precision(17);
  out << mask.dim << ' ' << mask.h << ' ' << mask.nx;
  if (mask.dim == 2) out << ' ' << mask.ny;
  out << '\n';
  for (int iy = 0; iy < mask.ny; ++iy) {
    for (int ix = 0; ix < mask.nx; ++ix) out << (mask.at(ix, iy) ? '1' : '0');
    out << '\n';
  }
}

}  // namespace fracgap
