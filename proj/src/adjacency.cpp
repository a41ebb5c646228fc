#include "sgg/adjacency.hpp"

#include <algorithm>
#include <cmath>

#include "sgg/error.hpp"

namespace sgg {

double iou(const Box& a, const Box& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

bool Adjacency::connected(std::size_t i, std::size_t j) const {
  const std::uint8_t t = tags[i * n + j];
  if (i == j) return self_loops;
  return t != 0;
}

std::vector<unsigned char> Adjacency::mask() const {
  std::vector<unsigned char> m(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m[i * n + j] = connected(i, j) ? 1 : 0;
  return m;
}

Adjacency build_adjacency(std::span<const Box> boxes, const AdjacencyThresholds& thresholds) {
  if (boxes.empty()) throw EmptyInput("adjacency over zero boxes");
  Adjacency adj;
  adj.n = boxes.size();
  adj.self_loops = thresholds.self_loops;
  adj.tags.assign(adj.n * adj.n, 0);
  for (std::size_t i = 0; i < adj.n; ++i) {
    adj.tags[i * adj.n + i] = kSelfLoop;
    for (std::size_t j = 0; j < adj.n; ++j) {
      if (i == j) continue;
      const Box& a = boxes[i];
      const Box& b = boxes[j];
      std::uint8_t t = 0;
      if (a.contains(b)) t |= kInsideRule;
      if (b.contains(a)) t |= kCoverRule;
      if (iou(a, b) > thresholds.iou) t |= kOverlapRule;
      const double d = std::hypot(b.cx() - a.cx(), b.cy() - a.cy());
      if (d / kImageDiagonal < thresholds.distance_ratio) t |= kRelativeRule;
      adj.tags[i * adj.n + j] = t;
    }
  }
  return adj;
}

}  // namespace sgg
