#include "emob/domain.hpp"

#include <algorithm>
#include <numeric>

namespace emob {

double PriceGrid::at(Point p) const {
  if (n < 2 || values.empty()) return 0.0;
  const double cell = city_km / (n - 1);
  const double fx = std::clamp(p.x / cell, 0.0, static_cast<double>(n - 1));
  const double fy = std::clamp(p.y / cell, 0.0, static_cast<double>(n - 1));
  const int ix = std::min(static_cast<int>(fx), n - 2);
  const int iy = std::min(static_cast<int>(fy), n - 2);
  const double tx = fx - ix;
  const double ty = fy - iy;
  auto v = [&](int x, int y) { return values[static_cast<std::size_t>(y) * n + x]; };
  return (1 - tx) * (1 - ty) * v(ix, iy) + tx * (1 - ty) * v(ix + 1, iy) +
         (1 - tx) * ty * v(ix, iy + 1) + tx * ty * v(ix + 1, iy + 1);
}

void CandidatePool::build_index() {
  const std::size_t n = stations.size();
  pois_of_station.assign(n, {});
  stations_of_poi.assign(pois.size(), {});
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t p = 0; p < pois.size(); ++p) {
      if (distance(stations[s].loc, pois[p]) <= kCoverageRadiusKm) {
        pois_of_station[s].push_back(static_cast<int>(p));
        stations_of_poi[p].push_back(static_cast<StationId>(s));
      }
    }
  }
  by_distance.assign(n, {});
  for (std::size_t s = 0; s < n; ++s) {
    auto& order = by_distance[s];
    order.reserve(n - 1);
    for (std::size_t o = 0; o < n; ++o)
      if (o != s) order.push_back(static_cast<StationId>(o));
    std::stable_sort(order.begin(), order.end(), [&](StationId a, StationId b) {
      return dist(static_cast<StationId>(s), a) < dist(static_cast<StationId>(s), b);
    });
  }
}

void CandidatePool::check_invariants() const {
  for (std::size_t i = 0; i < stations.size(); ++i) {
    const Station& s = stations[i];
    if (s.id != static_cast<StationId>(i))
      throw ValidationError("station ids must be 0..n-1, found " + std::to_string(s.id) + " at " +
                            std::to_string(i));
    if (s.docks < 1) throw ValidationError("station " + std::to_string(i) + " has no docks");
    if (s.daily_cost.milli <= 0)
      throw ValidationError("station " + std::to_string(i) + " has non-positive cost");
    if (s.loc.x < 0 || s.loc.y < 0 || s.loc.x > city_km || s.loc.y > city_km)
      throw ValidationError("station " + std::to_string(i) + " lies outside the city");
  }
}

DeploymentSnapshot DeploymentSnapshot::make(int day, std::vector<StationId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return DeploymentSnapshot{day, std::move(ids)};
}

Money snapshot_cost(const DeploymentSnapshot& snapshot, const CandidatePool& pool) {
  Money total;
  for (StationId id : snapshot.active) {
    if (!pool.contains(id))
      throw ValidationError("unknown station " + std::to_string(id) + " on day " +
                            std::to_string(snapshot.day));
    total += pool.stations[id].daily_cost;
  }
  return total;
}

Money plan_cost(const DeploymentPlan& plan, const CandidatePool& pool) {
  Money total;
  for (const auto& s : plan.snapshots) total += snapshot_cost(s, pool);
  return total;
}

SnapshotDiff snapshot_diff(const DeploymentSnapshot& prev, const DeploymentSnapshot& next) {
  SnapshotDiff d;
  std::set_difference(next.active.begin(), next.active.end(), prev.active.begin(), prev.active.end(),
                      std::back_inserter(d.opened));
  std::set_difference(prev.active.begin(), prev.active.end(), next.active.begin(), next.active.end(),
                      std::back_inserter(d.closed));
  return d;
}

std::vector<PlanIssue> validate_plan(const DeploymentPlan& plan, const CandidatePool& pool,
                                     int expected_days) {
  std::vector<PlanIssue> issues;
  auto check_ids = [&](const DeploymentSnapshot& s) {
    for (StationId id : s.active)
      if (!pool.contains(id))
        issues.push_back({s.day, "unknown station " + std::to_string(id)});
  };
  check_ids(plan.initial);
  for (std::size_t i = 0; i < plan.snapshots.size(); ++i) {
    const auto& s = plan.snapshots[i];
    if (s.day != static_cast<int>(i) + 1)
      issues.push_back({s.day, "non-contiguous days: expected day " + std::to_string(i + 1)});
    check_ids(s);
  }
  if (expected_days >= 0 && plan.days() != expected_days)
    issues.push_back({plan.days(), "plan has " + std::to_string(plan.days()) + " days, expected " +
                                       std::to_string(expected_days)});
  return issues;
}

std::vector<std::uint8_t> to_mask(const std::vector<StationId>& ids, std::size_t n) {
  std::vector<std::uint8_t> mask(n, 0);
  for (StationId id : ids)
    if (id >= 0 && static_cast<std::size_t>(id) < n) mask[id] = 1;
  return mask;
}

std::vector<StationId> from_mask(const std::vector<std::uint8_t>& mask) {
  std::vector<StationId> ids;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) ids.push_back(static_cast<StationId>(i));
  return ids;
}

}  // namespace emob
