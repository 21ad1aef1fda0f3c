#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace emob {

inline constexpr int kStepsPerDay = 144;
inline constexpr int kMinutesPerStep = 10;
inline constexpr double kCoverageRadiusKm = 1.0;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Money in integer thousandths of a currency unit, so that accounting
/// identities (NV = GMV - cost) hold exactly.
struct Money {
  std::int64_t milli = 0;

  static Money from_units(double units) { return Money{std::llround(units * 1000.0)}; }
  double units() const { return static_cast<double>(milli) / 1000.0; }

  Money& operator+=(Money o) {
    milli += o.milli;
    return *this;
  }
  Money& operator-=(Money o) {
    milli -= o.milli;
    return *this;
  }
  friend Money operator+(Money a, Money b) { return Money{a.milli + b.milli}; }
  friend Money operator-(Money a, Money b) { return Money{a.milli - b.milli}; }
  friend auto operator<=>(const Money&, const Money&) = default;
};

using StationId = int;

struct Station {
  StationId id = 0;
  Point loc;
  int docks = 1;
  Money daily_cost;
};

/// Property price sampled on a regular grid over the city square; queried by
/// bilinear interpolation.
struct PriceGrid {
  double city_km = 0.0;
  int n = 0;  // samples per axis
  std::vector<double> values;  // row-major, values[iy * n + ix]

  double at(Point p) const;
};

using WarningSink = std::function<void(const std::string&)>;

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CandidatePool {
  double city_km = 0.0;
  std::vector<Station> stations;
  std::vector<Point> pois;
  PriceGrid price;

  // Derived by build_index().
  std::vector<std::vector<int>> pois_of_station;       // POIs within 1 km
  std::vector<std::vector<StationId>> stations_of_poi;  // stations within 1 km
  std::vector<std::vector<StationId>> by_distance;      // other stations, nearest first

  std::size_t size() const { return stations.size(); }
  bool contains(StationId id) const { return id >= 0 && id < static_cast<StationId>(stations.size()); }
  double dist(StationId a, StationId b) const { return distance(stations[a].loc, stations[b].loc); }

  void build_index();
  /// Throws ValidationError when ids are not 0..n-1, docks < 1, cost <= 0 or a
  /// location is outside the city square.
  void check_invariants() const;
};

/// Active-station set for one day. `active` is kept sorted and unique.
struct DeploymentSnapshot {
  int day = 0;
  std::vector<StationId> active;

  static DeploymentSnapshot make(int day, std::vector<StationId> ids);
  bool operator==(const DeploymentSnapshot&) const = default;
};

struct DeploymentPlan {
  /// Day-0 state the episode starts from (S_0).
  DeploymentSnapshot initial;
  /// Days 1..T.
  std::vector<DeploymentSnapshot> snapshots;

  int days() const { return static_cast<int>(snapshots.size()); }
};

struct SnapshotDiff {
  std::vector<StationId> opened;
  std::vector<StationId> closed;
};

struct PlanIssue {
  int day = 0;
  std::string message;
};

Money snapshot_cost(const DeploymentSnapshot& snapshot, const CandidatePool& pool);
Money plan_cost(const DeploymentPlan& plan, const CandidatePool& pool);
SnapshotDiff snapshot_diff(const DeploymentSnapshot& prev, const DeploymentSnapshot& next);
/// Empty result means the plan is valid. `expected_days` < 0 skips the length check.
std::vector<PlanIssue> validate_plan(const DeploymentPlan& plan, const CandidatePool& pool,
                                     int expected_days = -1);

std::vector<std::uint8_t> to_mask(const std::vector<StationId>& ids, std::size_t n);
std::vector<StationId> from_mask(const std::vector<std::uint8_t>& mask);

}  // namespace emob
