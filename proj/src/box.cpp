#include "sgg/box.hpp"

#include <algorithm>
#include <cmath>

#include "sgg/error.hpp"

namespace sgg {

bool Box::valid() const {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  return x1 < x2 && y1 < y2 && in_unit(x1) && in_unit(y1) && in_unit(x2) && in_unit(y2);
}

bool Box::contains(const Box& inner) const {
  return x1 <= inner.x1 && y1 <= inner.y1 && inner.x2 <= x2 && inner.y2 <= y2;
}

Box union_box(const Box& a, const Box& b, double margin) {
  if (margin < 0.0) throw InvalidConfig("union box margin must be non-negative");
  Box u{std::min(a.x1, b.x1), std::min(a.y1, b.y1), std::max(a.x2, b.x2), std::max(a.y2, b.y2)};
  const double dx = margin * u.width();
  const double dy = margin * u.height();
  return Box{std::max(0.0, u.x1 - dx), std::max(0.0, u.y1 - dy), std::min(1.0, u.x2 + dx),
             std::min(1.0, u.y2 + dy)};
}

std::array<double, kSpatialFeatureWidth> spatial_feature(const Box& b) {
  return {b.x1, b.y1, b.x2, b.y2, b.cx(), b.cy(), b.width(), b.height()};
}

std::array<double, kSpatialFeatureWidth> relative_feature(const Box& s, const Box& o) {
  const double w = s.width(), h = s.height();
  return {(o.x1 - s.x1) / w,         (o.y1 - s.y1) / h,         (s.x2 - o.x2) / w,
          (s.y2 - o.y2) / h,         (o.cx() - s.cx()) / w,     (o.cy() - s.cy()) / h,
          std::log(o.width() / w),   std::log(o.height() / h)};
}

}  // namespace sgg
