// Marker-controlled watershed: flood a foreground region from labeled seeds in
// order of a scalar priority field (higher floods first). Contested voxels
// resolve by (higher priority, then smaller claiming label, then smaller flat
// index), so the result is machine-independent and reproducible bit-for-bit.
#pragma once

#include <cstdint>
#include <queue>
#include <vector>

#include "foramtrace/grid.hpp"

namespace foramtrace {

struct WatershedInput {
  const FloatGrid& priority;
  const MaskGrid& region;
  const LabelGrid& markers;
  Connectivity conn = Connectivity::Face6;
};

namespace ws_detail {

struct QueueEntry {
  float priority;
  std::uint32_t label;
  std::uint64_t index;
};

struct EntryLess {
  // std::priority_queue pops the *greatest* element; "greater" here means
  // higher priority, then smaller label, then smaller index.
  bool operator()(const QueueEntry& a, const QueueEntry& b) const {
    if (a.priority != b.priority) return a.priority < b.priority;
    if (a.label != b.label) return a.label > b.label;
    return a.index > b.index;
  }
};

}  // namespace ws_detail

inline LabelGrid seeded_watershed(const WatershedInput& in) {
  const Dims& d = in.region.dims();
  require_same_dims(d, in.priority.dims(), "seeded_watershed priority");
  require_same_dims(d, in.markers.dims(), "seeded_watershed markers");
  validate_mask(in.region, "seeded_watershed region");

  LabelGrid out(d);
  bool any_marker = false;
  for (std::size_t i = 0; i < in.markers.size(); ++i) {
    const std::uint32_t m = in.markers[i];
    if (m == 0) continue;
    if (in.region[i] == 0) {
      throw grid_error("seeded_watershed: marker outside region at flat index " +
                       std::to_string(i));
    }
    out[i] = m;
    any_marker = true;
  }
  if (!any_marker) throw grid_error("seeded_watershed: no marker voxels");

  const auto offs = neighbor_offsets(in.conn);
  std::priority_queue<ws_detail::QueueEntry, std::vector<ws_detail::QueueEntry>,
                      ws_detail::EntryLess>
      queue;

  auto push_neighbors = [&](std::size_t i, std::uint32_t label) {
    const auto [x, y, z] = d.coords(i);
    for (const Offset& o : offs) {
      const std::int64_t px = x + o[0], py = y + o[1], pz = z + o[2];
      if (!d.contains(px, py, pz)) continue;
      const std::size_t ni = d.index(px, py, pz);
      if (in.region[ni] == 0 || out[ni] != 0) continue;
      queue.push({in.priority[ni], label, ni});
    }
  };

  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] != 0) push_neighbors(i, out[i]);
  }
  while (!queue.empty()) {
    const auto e = queue.top();
    queue.pop();
    if (out[e.index] != 0) continue;  // stale entry
    out[e.index] = e.label;
    push_neighbors(e.index, e.label);
  }
  return out;
}

}  // namespace foramtrace
