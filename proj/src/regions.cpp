#include "emob/regions.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "emob/rng.hpp"

namespace emob {

namespace {

double sq(Point a, Point b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

std::vector<Point> kmeanspp(const std::vector<Point>& pts, int k, Rng& rng) {
  std::vector<Point> centers{pts[uniform_index(rng, static_cast<int>(pts.size()))]};
  std::vector<double> d2(pts.size(), std::numeric_limits<double>::max());
  while (static_cast<int>(centers.size()) < k) {
    double total = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      d2[i] = std::min(d2[i], sq(pts[i], centers.back()));
      total += d2[i];
    }
    double u = uniform01(rng) * total;
    std::size_t pick = 0;
    for (; pick + 1 < pts.size(); ++pick) {
      if (u < d2[pick]) break;
      u -= d2[pick];
    }
    centers.push_back(pts[pick]);
  }
  return centers;
}

void recenter(const std::vector<Point>& pts, const std::vector<int>& label, std::vector<Point>& centers) {
  std::vector<Point> sum(centers.size());
  std::vector<int> cnt(centers.size(), 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    sum[label[i]].x += pts[i].x;
    sum[label[i]].y += pts[i].y;
    ++cnt[label[i]];
  }
  for (std::size_t c = 0; c < centers.size(); ++c)
    if (cnt[c] > 0) centers[c] = {sum[c].x / cnt[c], sum[c].y / cnt[c]};
}

std::vector<int> balanced_assign(const std::vector<Point>& pts, const std::vector<Point>& centers, int cap) {
  const int n = static_cast<int>(pts.size());
  const int k = static_cast<int>(centers.size());
  std::vector<double> regret(n);
  for (int i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::max(), second = best;
    for (int c = 0; c < k; ++c) {
      const double d = std::sqrt(sq(pts[i], centers[c]));
      if (d < best) {
        second = best;
        best = d;
      } else if (d < second) {
        second = d;
      }
    }
    regret[i] = k > 1 ? second - best : 0.0;
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return regret[a] > regret[b]; });

  std::vector<int> label(n, -1), load(k, 0);
  for (int i : order) {
    int best = -1;
    double bd = 0;
    for (int c = 0; c < k; ++c) {
      if (load[c] >= cap) continue;
      const double d = sq(pts[i], centers[c]);
      if (best < 0 || d < bd) {
        best = c;
        bd = d;
      }
    }
    label[i] = best;
    ++load[best];
  }
  return label;
}

}  // namespace

std::vector<Point> convex_hull(std::vector<Point> p) {
  std::sort(p.begin(), p.end(), [](Point a, Point b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
  p.erase(std::unique(p.begin(), p.end(), [](Point a, Point b) { return a.x == b.x && a.y == b.y; }), p.end());
  if (p.size() < 3) return p;
  auto cross = [](Point o, Point a, Point b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); };
  std::vector<Point> h(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, lo = k + 1; i-- > 0;) {
    while (k >= lo && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  h.resize(k - 1);
  return h;
}

RegionPartition partition_regions(const CandidatePool& pool, int region_size, std::uint64_t seed) {
  const int n = static_cast<int>(pool.size());
  if (region_size <= 0 || n == 0 || n % region_size != 0)
    throw ValidationError("pool of " + std::to_string(n) + " stations is not divisible into regions of " +
                          std::to_string(region_size) + "; regenerate the scenario with a compatible size");
  const int k = n / region_size;
  std::vector<Point> pts(n);
  for (int i = 0; i < n; ++i) pts[i] = pool.stations[i].loc;

  Rng rng(derive_seed(seed, 0x5245));
  std::vector<int> best_label;
  double best_cost = std::numeric_limits<double>::max();
  for (int restart = 0; restart < 8; ++restart) {
    std::vector<Point> centers = kmeanspp(pts, k, rng);
    std::vector<int> label(n, 0);
    for (int it = 0; it < 100; ++it) {
      bool changed = false;
      for (int i = 0; i < n; ++i) {
        int c_best = 0;
        for (int c = 1; c < k; ++c)
          if (sq(pts[i], centers[c]) < sq(pts[i], centers[c_best])) c_best = c;
        changed |= c_best != label[i];
        label[i] = c_best;
      }
      recenter(pts, label, centers);
      if (!changed && it > 0) break;
    }
    for (int it = 0; it < 30; ++it) {
      std::vector<int> next = balanced_assign(pts, centers, region_size);
      recenter(pts, next, centers);
      const bool same = next == label;
      label = std::move(next);
      if (same) break;
    }
    double cost = 0;
    for (int i = 0; i < n; ++i) cost += sq(pts[i], centers[label[i]]);
    if (cost < best_cost - 1e-12) {
      best_cost = cost;
      best_label = label;
    }
  }

  // Number regions by their smallest member so ids do not depend on center order.
  std::vector<int> first(k, n);
  for (int i = 0; i < n; ++i) first[best_label[i]] = std::min(first[best_label[i]], i);
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return first[a] < first[b]; });
  std::vector<int> rename(k);
  for (int r = 0; r < k; ++r) rename[order[r]] = r;

  RegionPartition part;
  part.region_size = region_size;
  part.seed = seed;
  part.regions.resize(k);
  part.region_of.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    const int r = rename[best_label[i]];
    part.region_of[i] = r;
    part.regions[r].members.push_back(i);
  }
  for (int r = 0; r < k; ++r) {
    Region& reg = part.regions[r];
    reg.id = r;
    std::vector<Point> locs;
    for (StationId s : reg.members) {
      locs.push_back(pool.stations[s].loc);
      reg.center.x += pool.stations[s].loc.x / region_size;
      reg.center.y += pool.stations[s].loc.y / region_size;
    }
    reg.hull = convex_hull(std::move(locs));
  }

  part.pois_of.assign(k, {});
  for (int p = 0; p < static_cast<int>(pool.pois.size()); ++p) {
    int nearest = 0;
    double bd = std::numeric_limits<double>::max();
    for (int s = 0; s < n; ++s) {
      const double d = sq(pool.pois[p], pool.stations[s].loc);
      if (d < bd) {
        bd = d;
        nearest = s;
      }
    }
    part.pois_of[part.region_of[nearest]].push_back(p);
  }
  return part;
}

}  // namespace emob
