#pragma once

// Independent reference implementations used only by tests. None of these
// call into the library's geometry code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "zonewatch/geometry.hpp"

namespace zonewatch::testing {

// Even-odd parity via the sign of a cross product instead of an explicit
// intersection abscissa. Treats the chain as given (no implicit closing edge).
inline bool naive_parity_inside(Point p, std::span<const Point> chain) {
  bool inside = false;
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    Point a = chain[i];
    Point b = chain[i + 1];
    const bool a_below = a.y > p.y;
    const bool b_below = b.y > p.y;
    if (a_below == b_below) continue;
    if (a.y > b.y) std::swap(a, b);  // orient upward so the sign test is uniform
    // Crossing is left of p iff p lies strictly to the right of the upward edge a->b.
    const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    if (cross < 0.0) inside = !inside;
  }
  return inside;
}

inline double point_segment_distance(Point p, Point a, Point b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

inline double distance_to_chain(Point p, std::span<const Point> chain) {
  double best = INFINITY;
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    best = std::min(best, point_segment_distance(p, chain[i], chain[i + 1]));
  }
  return best;
}

// Minimum distance from densely sampled points of s1 to segment s2.
inline double sampled_segment_gap(Segment s1, Segment s2, int samples = 20000) {
  double best = INFINITY;
  for (int i = 0; i <= samples; ++i) {
    const double t = static_cast<double>(i) / samples;
    const Point q{s1.a.x + t * (s1.b.x - s1.a.x), s1.a.y + t * (s1.b.y - s1.a.y)};
    best = std::min(best, point_segment_distance(q, s2.a, s2.b));
  }
  return best;
}

// Scanline fill of a closed polygon into a size x size grid. Pixel (col,row)
// is filled when its centre (col+0.5,row+0.5) lies between an odd and even
// crossing of the row's centre line.
class RasterOracle {
 public:
  RasterOracle(const std::vector<Point>& polygon, int size) : size_(size), cells_(std::size_t(size) * size, 0) {
    std::vector<double> xs;
    for (int row = 0; row < size; ++row) {
      const double yc = row + 0.5;
      xs.clear();
      for (std::size_t i = 0; i + 1 < polygon.size(); ++i) {
        const Point a = polygon[i];
        const Point b = polygon[i + 1];
        if ((a.y <= yc && b.y > yc) || (b.y <= yc && a.y > yc)) {
          xs.push_back(a.x + (yc - a.y) / (b.y - a.y) * (b.x - a.x));
        }
      }
      std::sort(xs.begin(), xs.end());
      for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
        // Columns whose centre lies in (xs[k], xs[k+1]).
        const int c0 = std::max(0, static_cast<int>(std::ceil(xs[k] - 0.5)));
        const int c1 = std::min(size - 1, static_cast<int>(std::floor(xs[k + 1] - 0.5)));
        if (c0 <= c1) {
          std::fill(cells_.begin() + std::ptrdiff_t(row) * size + c0,
                    cells_.begin() + std::ptrdiff_t(row) * size + c1 + 1, std::uint8_t{1});
        }
      }
    }
  }

  bool at(Point p) const {
    const int col = static_cast<int>(std::floor(p.x));
    const int row = static_cast<int>(std::floor(p.y));
    if (col < 0 || row < 0 || col >= size_ || row >= size_) return false;
    return cells_[std::size_t(row) * size_ + col] != 0;
  }

 private:
  int size_;
  std::vector<std::uint8_t> cells_;
};

// Random simple closed polygon: star-shaped around `center`, angles sorted and
// strictly distinct, radii in [0.2, 1] * max_radius. Last vertex repeats the first.
inline std::vector<Point> random_simple_polygon(std::mt19937_64& rng, std::size_t vertices, Point center,
                                                double max_radius) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> angles(vertices);
  for (std::size_t i = 0; i < vertices; ++i) {
    // One angle per equal sector keeps consecutive vertices apart.
    angles[i] = (static_cast<double>(i) + 0.1 + 0.8 * unit(rng)) * 2.0 * std::numbers::pi / vertices;
  }
  std::vector<Point> poly;
  for (double a : angles) {
    const double r = max_radius * (0.2 + 0.8 * unit(rng));
    poly.push_back({center.x + r * std::cos(a), center.y + r * std::sin(a)});
  }
  poly.push_back(poly.front());
  return poly;
}

inline std::vector<Point> closed_square(double x0, double y0, double side) {
  return {{x0, y0}, {x0 + side, y0}, {x0 + side, y0 + side}, {x0, y0 + side}, {x0, y0}};
}

}  // namespace zonewatch::testing
