#pragma once

#include <array>
#include <cstddef>

namespace sgg {

// Axis-aligned box in normalized image coordinates, corner convention.
struct Box {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double cx() const { return 0.5 * (x1 + x2); }
  double cy() const { return 0.5 * (y1 + y2); }
  // x1 < x2, y1 < y2, all coordinates in [0,1].
  bool valid() const;
  // Non-strict containment of `inner` on all four edges.
  bool contains(const Box& inner) const;

  friend bool operator==(const Box&, const Box&) = default;
};

inline constexpr double kDefaultUnionMargin = 0.05;
inline constexpr std::size_t kSpatialFeatureWidth = 8;

// Smallest box covering a and b, grown by margin·(width, height) of that box
// on every side and clipped to [0,1].
Box union_box(const Box& a, const Box& b, double margin = kDefaultUnionMargin);

// [x1, y1, x2, y2, cx, cy, w, h]
std::array<double, kSpatialFeatureWidth> spatial_feature(const Box& b);

// Geometry of `object` in the frame of `subject`: edge offsets
// [(x1o-x1s)/ws, (y1o-y1s)/hs, (x2s-x2o)/ws, (y2s-y2o)/hs] (all >= 0 exactly
// when subject contains object, all <= 0 when object contains subject),
// center offsets [(cxo-cxs)/ws, (cyo-cys)/hs] and log size ratios
// [log(wo/ws), log(ho/hs)].
std::array<double, kSpatialFeatureWidth> relative_feature(const Box& subject, const Box& object);

}  // namespace sgg
