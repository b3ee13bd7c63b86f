// Chamber statistics and growth-path reconstruction: start from the smallest
// chamber, then repeatedly hop to the unvisited chamber with the nearest
// centroid. Ties (volume or distance) resolve to the smaller chamber id.
#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <vector>

#include "foramtrace/grid.hpp"
#include "foramtrace/labeling.hpp"

namespace foramtrace {

struct ChamberStats {
  std::uint32_t id = 0;
  std::uint64_t volume = 0;                    // voxel count
  std::array<double, 3> centroid = {0, 0, 0};  // mean voxel coordinates
};

inline double centroid_distance_sq(const std::array<double, 3>& a,
                                   const std::array<double, 3>& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

inline std::vector<ChamberStats> chamber_stats(const LabelGrid& labels) {
  const std::uint32_t m = max_label(labels);
  if (m == 0) throw grid_error("chamber_stats: labeling has no positive labels");
  std::vector<std::uint64_t> volume(m + 1, 0);
  std::vector<std::array<double, 3>> sum(m + 1, {0, 0, 0});

  const Dims& d = labels.dims();
  std::size_t i = 0;
  for (std::int64_t z = 0; z < d.nz; ++z) {
    for (std::int64_t y = 0; y < d.ny; ++y) {
      for (std::int64_t x = 0; x < d.nx; ++x, ++i) {
        const std::uint32_t v = labels[i];
        if (v == 0) continue;
        ++volume[v];
        sum[v][0] += double(x);
        sum[v][1] += double(y);
        sum[v][2] += double(z);
      }
    }
  }
  std::vector<ChamberStats> out;
  for (std::uint32_t id = 1; id <= m; ++id) {
    if (volume[id] == 0) continue;
    const double n = double(volume[id]);
    out.push_back({id, volume[id], {sum[id][0] / n, sum[id][1] / n, sum[id][2] / n}});
  }
  return out;
}

struct GrowthPath {
  std::vector<std::uint32_t> order;        // chamber ids, first = smallest volume
  std::vector<double> step_distance;       // [0] = 0, then centroid hop lengths
};

inline GrowthPath growth_path(const std::vector<ChamberStats>& stats) {
  if (stats.empty()) throw grid_error("growth_path: no chambers");
  const std::size_t n = stats.size();

  std::size_t start = 0;
  for (std::size_t j = 1; j < n; ++j) {
    if (stats[j].volume < stats[start].volume ||
        (stats[j].volume == stats[start].volume && stats[j].id < stats[start].id)) {
      start = j;
    }
  }

  GrowthPath path;
  path.order.reserve(n);
  path.step_distance.reserve(n);
  std::vector<bool> visited(n, false);
  std::size_t current = start;
  visited[current] = true;
  path.order.push_back(stats[current].id);
  path.step_distance.push_back(0.0);

  for (std::size_t step = 1; step < n; ++step) {
    std::size_t best = n;
    double best_d2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (visited[j]) continue;
      const double d2 = centroid_distance_sq(stats[j].centroid, stats[current].centroid);
      if (best == n || d2 < best_d2 || (d2 == best_d2 && stats[j].id < stats[best].id)) {
        best = j;
        best_d2 = d2;
      }
    }
    visited[best] = true;
    path.order.push_back(stats[best].id);
    path.step_distance.push_back(std::sqrt(best_d2));
    current = best;
  }
  return path;
}

// CSV columns: order_index, chamber_id, centroid_x, centroid_y, centroid_z,
// volume_voxels, step_distance
inline void write_growth_path_csv(const std::vector<ChamberStats>& stats,
                                  const GrowthPath& path, std::ostream& out) {
  out << "order_index,chamber_id,centroid_x,centroid_y,centroid_z,volume_voxels,"
         "step_distance\n";
  std::vector<const ChamberStats*> by_id;
  for (const auto& s : stats) {
    if (s.id >= by_id.size()) by_id.resize(s.id + 1, nullptr);
    by_id[s.id] = &s;
  }
  const auto old_precision = out.precision(10);
  for (std::size_t k = 0; k < path.order.size(); ++k) {
    const ChamberStats& s = *by_id[path.order[k]];
    out << k << "," << s.id << "," << s.centroid[0] << "," << s.centroid[1] << ","
        << s.centroid[2] << "," << s.volume << "," << path.step_distance[k] << "\n";
  }
  out.precision(old_precision);
}

}  // namespace foramtrace
