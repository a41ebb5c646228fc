#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sgg/box.hpp"

namespace sgg {

// Intersection over union; 0 for disjoint boxes.
double iou(const Box& a, const Box& b);

struct AdjacencyThresholds {
  double iou = 0.5;             // overlap neighbors: IoU strictly above
  double distance_ratio = 0.5;  // relative neighbors: center distance / diagonal strictly below
  bool self_loops = true;
};

// Diagonal length of the normalized image.
inline constexpr double kImageDiagonal = 1.4142135623730951;

// Rule tags of an ordered pair (i, j), combined as a bit set.
enum NeighborRule : std::uint8_t {
  kInsideRule = 1,    // b_i completely includes b_j
  kCoverRule = 2,     // b_i is fully covered by b_j
  kOverlapRule = 4,   // IoU above threshold
  kRelativeRule = 8,  // center distance / diagonal below threshold
  kSelfLoop = 16,     // diagonal entry; rules are not evaluated there
};

struct Adjacency {
  std::size_t n = 0;
  bool self_loops = true;
  std::vector<std::uint8_t> tags;  // n×n rule bit sets

  bool connected(std::size_t i, std::size_t j) const;
  bool has(std::size_t i, std::size_t j, NeighborRule rule) const { return (tags[i * n + j] & rule) != 0; }
  // n×n 0/1 neighbor mask, row i listing the neighbors of i.
  std::vector<unsigned char> mask() const;
};

Adjacency build_adjacency(std::span<const Box> boxes, const AdjacencyThresholds& thresholds = {});

}  // namespace sgg
