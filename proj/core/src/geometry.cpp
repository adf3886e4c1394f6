#include "zonewatch/geometry.hpp"

#include <algorithm>

#include "zonewatch/error.hpp"

namespace zonewatch {
namespace {

// Sign of the cross product (b - a) x (c - a): >0 counter-clockwise, <0 clockwise.
int orientation(Point a, Point b, Point c) noexcept {
  const double v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  return (v > 0.0) - (v < 0.0);
}

// c is known to be collinear with a-b; check it lies within the segment's extent.
bool within_extent(Point a, Point b, Point c) noexcept {
  return c.x >= std::min(a.x, b.x) && c.x <= std::max(a.x, b.x) && c.y >= std::min(a.y, b.y) &&
         c.y <= std::max(a.y, b.y);
}

}  // namespace

BBox bounding_box(std::span<const Point> chain) {
  if (chain.empty()) throw EmptyChain();
  BBox box{chain.front().x, chain.front().y, chain.front().x, chain.front().y};
  for (const Point& v : chain.subspan(1)) {
    box.min_x = std::min(box.min_x, v.x);
    box.min_y = std::min(box.min_y, v.y);
    box.max_x = std::max(box.max_x, v.x);
    box.max_y = std::max(box.max_y, v.y);
  }
  return box;
}

bool segments_intersect(const Segment& s1, const Segment& s2) noexcept {
  const int o1 = orientation(s1.a, s1.b, s2.a);
  const int o2 = orientation(s1.a, s1.b, s2.b);
  const int o3 = orientation(s2.a, s2.b, s1.a);
  const int o4 = orientation(s2.a, s2.b, s1.b);

  if (o1 != o2 && o3 != o4) return true;

  if (o1 == 0 && within_extent(s1.a, s1.b, s2.a)) return true;
  if (o2 == 0 && within_extent(s1.a, s1.b, s2.b)) return true;
  if (o3 == 0 && within_extent(s2.a, s2.b, s1.a)) return true;
  if (o4 == 0 && within_extent(s2.a, s2.b, s1.b)) return true;
  return false;
}

std::size_t ray_crossings(Point p, std::span<const Point> chain) noexcept {
  std::size_t count = 0;
  for (std::size_t i = 1; i < chain.size(); ++i) {
    const Point a = chain[i - 1];
    const Point b = chain[i];
    if ((a.y > p.y) == (b.y > p.y)) continue;
    const double x_int = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
    if (x_int < p.x) ++count;
  }
  return count;
}

bool point_in_zone(Point p, std::span<const Point> chain, Prefilter prefilter) {
  if (chain.size() < 2) return false;
  return point_in_zone(p, chain, bounding_box(chain), prefilter);
}

bool point_in_zone(Point p, std::span<const Point> chain, const BBox& bounds,
                   Prefilter prefilter) noexcept {
  if (chain.size() < 2) return false;
  if (prefilter == Prefilter::On && !bounds.contains(p)) return false;
  return ray_crossings(p, chain) % 2 == 1;
}

PolylineChain translated(std::span<const Point> chain, Point offset) {
  PolylineChain out;
  out.reserve(chain.size());
  for (const Point& v : chain) out.push_back(v + offset);
  return out;
}

}  // namespace zonewatch
