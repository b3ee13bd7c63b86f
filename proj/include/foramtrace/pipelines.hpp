// The three instance-segmentation post-processing pipelines. All of them end
// in a marker-controlled watershed over a growth region with distance-
// transform priority; they differ in which probability maps define markers
// and region. Connected components always use the 6-neighborhood.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "foramtrace/grid.hpp"
#include "foramtrace/labeling.hpp"
#include "foramtrace/losses.hpp"
#include "foramtrace/morphology.hpp"
#include "foramtrace/rag_gasp.hpp"
#include "foramtrace/watershed.hpp"

namespace foramtrace {

class pipeline_error : public std::runtime_error {
public:
  explicit pipeline_error(const std::string& what) : std::runtime_error(what) {}
};

enum class PipelineVariant { InteriorSW, BoundaryGASP, MtlSW };

inline const char* pipeline_name(PipelineVariant v) {
  switch (v) {
    case PipelineVariant::InteriorSW: return "interior-sw";
    case PipelineVariant::BoundaryGASP: return "boundary-gasp";
    case PipelineVariant::MtlSW: return "mtl-sw";
  }
  return "?";
}

struct PipelineConfig {
  double tau_interior = 0.5;           // interior-sw foreground threshold
  double tau_boundary_plantseg = 0.3;  // boundary-gasp wall threshold
  double tau1 = 0.5;                   // mtl-sw interior threshold
  double tau2 = 0.4;                   // mtl-sw boundary exclusion threshold
  double tau3 = 0.9;                   // mtl-sw confident-background threshold
  ErosionSpec erosion = {Connectivity::Face6, 2};
  std::size_t min_voxels = 50;
  GaspConfig gasp;
};

namespace pipeline_detail {

inline bool any_foreground(const MaskGrid& m) {
  for (std::uint8_t v : m.values())
    if (v != 0) return true;
  return false;
}

inline MaskGrid complement(const MaskGrid& m) {
  MaskGrid out(m.dims());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i] ? 0 : 1;
  return out;
}

inline MaskGrid mask_and(const MaskGrid& a, const MaskGrid& b) {
  require_same_dims(a.dims(), b.dims(), "mask_and");
  MaskGrid out(a.dims());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] && b[i]) ? 1 : 0;
  return out;
}

inline MaskGrid mask_or(const MaskGrid& a, const MaskGrid& b) {
  require_same_dims(a.dims(), b.dims(), "mask_or");
  MaskGrid out(a.dims());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] || b[i]) ? 1 : 0;
  return out;
}

// Multi-source breadth-first assignment of region voxels to seed labels.
// Voxels are claimed ring by ring (geodesic distance within the region);
// simultaneous claims resolve to the smaller label. Used to re-attach the
// pinch margin around cavities, where a geodesic race keeps a cavity's own
// rim with the cavity even when its wall is porous.
inline LabelGrid bfs_assign(const MaskGrid& region, const LabelGrid& seeds) {
  const Dims& d = region.dims();
  require_same_dims(d, seeds.dims(), "bfs_assign");
  LabelGrid out(d);
  std::vector<std::uint32_t> claimed_ring(region.size(), 0);
  std::vector<std::size_t> frontier;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (seeds[i] != 0 && region[i] != 0) {
      out[i] = seeds[i];
      frontier.push_back(i);
    }
  }
  std::vector<std::size_t> next;
  std::uint32_t ring = 0;
  while (!frontier.empty()) {
    ++ring;
    next.clear();
    for (const std::size_t i : frontier) {
      const auto [x, y, z] = d.coords(i);
      const std::uint32_t label = out[i];
      for (const Offset& o : detail::kFace6) {
        const std::int64_t px = x + o[0], py = y + o[1], pz = z + o[2];
        if (!d.contains(px, py, pz)) continue;
        const std::size_t ni = d.index(px, py, pz);
        if (region[ni] == 0) continue;
        if (out[ni] == 0) {
          out[ni] = label;
          claimed_ring[ni] = ring;
          next.push_back(ni);
        } else if (claimed_ring[ni] == ring && out[ni] > label) {
          out[ni] = label;  // contested in this ring: smaller label wins
        }
      }
    }
    frontier.swap(next);
  }
  return out;
}

// One face-neighborhood majority vote: a voxel flips when at least four of
// its six neighbors (out-of-bounds counts as background) hold the other value.
inline MaskGrid majority_smooth(const MaskGrid& mask) {
  const Dims& d = mask.dims();
  MaskGrid out(d);
  std::size_t i = 0;
  for (std::int64_t z = 0; z < d.nz; ++z) {
    for (std::int64_t y = 0; y < d.ny; ++y) {
      for (std::int64_t x = 0; x < d.nx; ++x, ++i) {
        int fg = 0;
        for (const Offset& o : detail::kFace6) {
          const std::int64_t px = x + o[0], py = y + o[1], pz = z + o[2];
          if (d.contains(px, py, pz) && mask.at(px, py, pz) != 0) ++fg;
        }
        out[i] = fg >= 4 ? 1 : (fg <= 2 ? 0 : mask[i]);
      }
    }
  }
  return out;
}

}  // namespace pipeline_detail

// Interior pipeline: threshold -> erode -> CCL -> drop small -> markers, then
// watershed over the un-eroded mask with distance-transform priority.
inline LabelGrid run_interior_sw(const FloatGrid& interior_prob, const PipelineConfig& cfg) {
  const MaskGrid mask = threshold(interior_prob, cfg.tau_interior);
  if (!pipeline_detail::any_foreground(mask)) {
    throw pipeline_error("no chambers detected: empty foreground at tau=" +
                         std::to_string(cfg.tau_interior));
  }
  const MaskGrid eroded = erode(mask, cfg.erosion);
  const LabelGrid markers =
      remove_small(connected_components(eroded, Connectivity::Face6), cfg.min_voxels);
  if (max_label(markers) == 0) {
    throw pipeline_error("no chambers detected: no markers survive erosion and "
                         "small-component removal");
  }
  const FloatGrid priority = distance_transform(mask);
  return compact_labels(seeded_watershed({priority, mask, markers, Connectivity::Face6}));
}

// Boundary pipeline: thresholded walls bound cavities; cavity components that
// do not drain to the volume border become seeds; a watershed over the
// specimen extent (walls + cavities) builds supervoxels; GASP merges them
// wherever the shared interface is weak.
//
// Cavity extraction erodes the wall complement by one voxel before labeling
// so a needle-thin perforation in a wall cannot leak a cavity into the outer
// background; the eroded margin is re-attached by a watershed restricted to
// the complement.
inline LabelGrid run_boundary_gasp(const FloatGrid& boundary_prob, const PipelineConfig& cfg,
                                   std::vector<MergeStep>* merge_trace = nullptr) {
  const Dims& d = boundary_prob.dims();
  const MaskGrid walls = threshold(boundary_prob, cfg.tau_boundary_plantseg);
  const MaskGrid open = pipeline_detail::complement(walls);

  const LabelGrid cores =
      connected_components(erode_once(open, Connectivity::Face6), Connectivity::Face6);
  const std::uint32_t n_cores = max_label(cores);
  if (n_cores == 0) throw pipeline_error("no interior components");

  // assign the eroded margin back to its cavity (or to the outside), then
  // classify: a region that drains to the volume border is outside
  const LabelGrid filled = pipeline_detail::bfs_assign(open, cores);
  std::vector<bool> touches_border(n_cores + 1, false);
  std::size_t i = 0;
  for (std::int64_t z = 0; z < d.nz; ++z) {
    for (std::int64_t y = 0; y < d.ny; ++y) {
      for (std::int64_t x = 0; x < d.nx; ++x, ++i) {
        const std::uint32_t c = filled[i];
        if (c == 0) continue;
        if (x == 0 || y == 0 || z == 0 || x == d.nx - 1 || y == d.ny - 1 || z == d.nz - 1) {
          touches_border[c] = true;
        }
      }
    }
  }
  LabelGrid interior(d);
  for (std::size_t k = 0; k < filled.size(); ++k) {
    const std::uint32_t c = filled[k];
    interior[k] = (c != 0 && !touches_border[c]) ? c : 0;
  }
  const LabelGrid seeds = remove_small(interior, cfg.min_voxels);
  if (max_label(seeds) == 0) throw pipeline_error("no interior components");
  const MaskGrid interior_mask = foreground_mask(seeds);

  const MaskGrid extent = pipeline_detail::mask_or(walls, interior_mask);
  const FloatGrid priority = distance_transform(interior_mask);
  const LabelGrid supervoxels =
      seeded_watershed({priority, extent, seeds, Connectivity::Face6});

  const RegionGraph rag = build_rag(supervoxels, boundary_prob, Connectivity::Face6);
  const Clustering clusters = gasp_average(rag, cfg.gasp, merge_trace);
  return relabel_by_clusters(supervoxels, clusters);
}

// Multi-task pipeline: confident interior voxels (interior high, boundary and
// background low) seed a watershed over everything that is not confidently
// background.
inline LabelGrid run_mtl_sw(const ProbabilityTriplet& maps, const PipelineConfig& cfg) {
  maps.require_aligned("run_mtl_sw");
  const MaskGrid region = pipeline_detail::complement(threshold(maps.background, cfg.tau3));
  MaskGrid seed_mask = pipeline_detail::mask_and(
      threshold(maps.interior, cfg.tau1),
      pipeline_detail::complement(threshold(maps.boundary, cfg.tau2)));
  seed_mask = pipeline_detail::mask_and(seed_mask, region);
  seed_mask = pipeline_detail::mask_and(pipeline_detail::majority_smooth(seed_mask), region);

  const LabelGrid seeds =
      remove_small(connected_components(seed_mask, Connectivity::Face6), cfg.min_voxels);
  if (max_label(seeds) == 0) {
    throw pipeline_error("no chambers detected: empty seed set");
  }
  const FloatGrid priority = distance_transform(region);
  return compact_labels(seeded_watershed({priority, region, seeds, Connectivity::Face6}));
}

}  // namespace foramtrace
