#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace zonewatch {

// Image-plane point. x grows rightwards from the left edge, y grows downwards
// from the top edge. Off-image (negative or out-of-range) values are legal.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
};

struct Segment {
  Point a;
  Point b;
};

// Ordered vertex list. Consecutive vertices form segments; there is no
// implicit closing segment from the last vertex back to the first.
using PolylineChain = std::vector<Point>;

struct BBox {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  // Inclusive on all four edges.
  bool contains(Point p) const noexcept {
    return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
  }

  friend bool operator==(const BBox&, const BBox&) = default;
};

enum class Prefilter { On, Off };

// Componentwise min/max over the vertices. Throws EmptyChain for an empty chain.
BBox bounding_box(std::span<const Point> chain);

// True iff the closed segments share at least one point. Collinear overlap
// and touching endpoints count as intersecting.
bool segments_intersect(const Segment& s1, const Segment& s2) noexcept;

/// Number of chain segments hit by the open horizontal ray running leftwards
/// from `p`.
///
/// A segment (a, b) is counted iff exactly one endpoint lies strictly below
/// p.y (`(a.y > p.y) != (b.y > p.y)`) and the abscissa where it meets the
/// line y = p.y is strictly less than p.x. The half-open rule counts a shared
/// vertex once, and horizontal or degenerate segments never count.
std::size_t ray_crossings(Point p, std::span<const Point> chain) noexcept;

/// Zone membership: odd ray-crossing parity, gated by the chain's bounding
/// box when `prefilter` is On. Chains with fewer than two vertices contain
/// nothing.
///
/// With the prefilter On a point outside the bounding box is rejected before
/// any crossing is counted. For a closed chain this never changes the answer;
/// for an open chain it can (a point to the right of a lone vertical segment
/// has parity 1 but lies outside the segment's box).
bool point_in_zone(Point p, std::span<const Point> chain, Prefilter prefilter = Prefilter::On);

// Same as above with a precomputed bounding box for `chain`.
bool point_in_zone(Point p, std::span<const Point> chain, const BBox& bounds,
                   Prefilter prefilter = Prefilter::On) noexcept;

PolylineChain translated(std::span<const Point> chain, Point offset);

}  // namespace zonewatch
