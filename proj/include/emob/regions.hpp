#pragma once

#include <cstdint>
#include <vector>

#include "emob/domain.hpp"

namespace emob {

struct Region {
  int id = 0;
  std::vector<StationId> members;  // sorted, exactly M
  std::vector<Point> hull;         // convex hull, counter-clockwise
  Point center;
};

struct RegionPartition {
  int region_size = 0;
  std::uint64_t seed = 0;
  std::vector<Region> regions;
  std::vector<int> region_of;               // per station
  std::vector<std::vector<int>> pois_of;    // per region: POIs whose nearest station is a member

  int count() const { return static_cast<int>(regions.size()); }
};

/// Balanced k-means: Lloyd iterations from k-means++ seeds, then a
/// capacity-M assignment that places points with the largest regret
/// (second-nearest minus nearest center) first. Deterministic in `seed`.
RegionPartition partition_regions(const CandidatePool& pool, int region_size, std::uint64_t seed = 0);

/// Andrew's monotone chain; collinear points dropped.
std::vector<Point> convex_hull(std::vector<Point> points);

}  // namespace emob
