// Connected-component labeling (two-pass union-find), removal of small
// components, and label compaction. Output labels are 1..L in scan-order of
// first encounter, which makes every labeling deterministic.
#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "foramtrace/grid.hpp"

namespace foramtrace {

namespace label_detail {

class UnionFind {
public:
  std::uint32_t make() {
    parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
    return parent_.back();
  }
  std::uint32_t find(std::uint32_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) parent_[b] = a;  // keep the smaller (earlier) provisional label as root
    else parent_[a] = b;
  }

private:
  std::vector<std::uint32_t> parent_;
};

inline bool is_backward(const Offset& o) {
  if (o[2] != 0) return o[2] < 0;
  if (o[1] != 0) return o[1] < 0;
  return o[0] < 0;
}

}  // namespace label_detail

inline LabelGrid connected_components(const MaskGrid& mask, Connectivity conn) {
  validate_mask(mask, "connected_components input");
  const Dims& d = mask.dims();
  LabelGrid provisional(d);
  label_detail::UnionFind uf;
  uf.make();  // slot 0 = background, never united

  std::vector<Offset> backward;
  for (const Offset& o : neighbor_offsets(conn)) {
    if (label_detail::is_backward(o)) backward.push_back(o);
  }

  std::size_t i = 0;
  for (std::int64_t z = 0; z < d.nz; ++z) {
    for (std::int64_t y = 0; y < d.ny; ++y) {
      for (std::int64_t x = 0; x < d.nx; ++x, ++i) {
        if (mask[i] == 0) continue;
        std::uint32_t lab = 0;
        for (const Offset& o : backward) {
          const std::int64_t px = x + o[0], py = y + o[1], pz = z + o[2];
          if (!d.contains(px, py, pz)) continue;
          const std::uint32_t nl = provisional.at(px, py, pz);
          if (nl == 0) continue;
          if (lab == 0) lab = nl;
          else uf.unite(lab, nl);
        }
        if (lab == 0) lab = uf.make();
        provisional[i] = lab;
      }
    }
  }

  // second pass: roots -> compact labels in first-encounter order
  LabelGrid out(d);
  std::vector<std::uint32_t> root_to_label;
  std::uint32_t next = 1;
  for (std::size_t k = 0; k < provisional.size(); ++k) {
    if (provisional[k] == 0) continue;
    const std::uint32_t r = uf.find(provisional[k]);
    if (r >= root_to_label.size()) root_to_label.resize(r + 1, 0);
    if (root_to_label[r] == 0) root_to_label[r] = next++;
    out[k] = root_to_label[r];
  }
  return out;
}

inline std::uint32_t max_label(const LabelGrid& labels) {
  std::uint32_t m = 0;
  for (std::uint32_t v : labels.values()) m = std::max(m, v);
  return m;
}

// Voxel count per label, index 0 = background.
inline std::vector<std::size_t> label_histogram(const LabelGrid& labels) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(max_label(labels)) + 1, 0);
  for (std::uint32_t v : labels.values()) ++counts[v];
  return counts;
}

// Bijectively remaps positive labels to 1..L preserving first-encounter order.
inline LabelGrid compact_labels(const LabelGrid& labels) {
  const std::uint32_t m = max_label(labels);
  std::vector<std::uint32_t> remap(static_cast<std::size_t>(m) + 1, 0);
  LabelGrid out(labels.dims());
  std::uint32_t next = 1;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::uint32_t v = labels[i];
    if (v == 0) continue;
    if (remap[v] == 0) remap[v] = next++;
    out[i] = remap[v];
  }
  return out;
}

inline MaskGrid foreground_mask(const LabelGrid& labels) {
  MaskGrid out(labels.dims());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = labels[i] != 0 ? 1 : 0;
  return out;
}

// Drops components below min_voxels and compacts the survivors.
inline LabelGrid remove_small(const LabelGrid& labels, std::size_t min_voxels) {
  if (min_voxels < 1) throw grid_error("remove_small: min_voxels must be >= 1");
  const auto counts = label_histogram(labels);
  LabelGrid out(labels.dims());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::uint32_t v = labels[i];
    out[i] = (v != 0 && counts[v] >= min_voxels) ? v : 0;
  }
  return compact_labels(out);
}

}  // namespace foramtrace
