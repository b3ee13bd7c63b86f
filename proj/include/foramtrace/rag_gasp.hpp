// Region adjacency graph over supervoxels and threshold-stopped average-linkage
// agglomeration (GASP with additive affinities only: no repulsive edges are
// available from nonnegative boundary probabilities). Edge weight = mean
// boundary probability over the interface voxel pairs; affinity = 1 - weight.
#pragma once

#include <cstdint>
#include <map>
#include <queue>
#include <set>
#include <vector>

#include "foramtrace/grid.hpp"
#include "foramtrace/labeling.hpp"

namespace foramtrace {

struct RagEdge {
  std::uint32_t u = 0;
  std::uint32_t v = 0;  // u < v
  double mean_boundary_prob = 0.0;
  std::uint64_t interface_voxel_pairs = 0;
};

struct RegionGraph {
  std::vector<std::uint32_t> nodes;  // ascending supervoxel labels
  std::vector<RagEdge> edges;       // sorted by (u, v)
};

inline RegionGraph build_rag(const LabelGrid& supervoxels, const FloatGrid& boundary,
                             Connectivity conn) {
  require_same_dims(supervoxels.dims(), boundary.dims(), "build_rag");
  validate_probability(boundary, "build_rag boundary");
  const Dims& d = supervoxels.dims();

  struct Acc {
    double sum = 0.0;
    std::uint64_t count = 0;
  };
  std::map<std::pair<std::uint32_t, std::uint32_t>, Acc> acc;
  std::set<std::uint32_t> nodes;

  const auto offs = neighbor_offsets(conn);
  std::vector<Offset> forward;
  for (const Offset& o : offs) {
    if (!label_detail::is_backward(o)) forward.push_back(o);
  }

  std::size_t i = 0;
  for (std::int64_t z = 0; z < d.nz; ++z) {
    for (std::int64_t y = 0; y < d.ny; ++y) {
      for (std::int64_t x = 0; x < d.nx; ++x, ++i) {
        const std::uint32_t a = supervoxels[i];
        if (a == 0) continue;
        nodes.insert(a);
        for (const Offset& o : forward) {
          const std::int64_t px = x + o[0], py = y + o[1], pz = z + o[2];
          if (!d.contains(px, py, pz)) continue;
          const std::size_t ni = d.index(px, py, pz);
          const std::uint32_t b = supervoxels[ni];
          if (b == 0 || b == a) continue;
          auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
          auto& e = acc[key];
          e.sum += 0.5 * (double(boundary[i]) + double(boundary[ni]));
          e.count += 1;
        }
      }
    }
  }

  RegionGraph g;
  g.nodes.assign(nodes.begin(), nodes.end());
  g.edges.reserve(acc.size());
  for (const auto& [key, a] : acc) {
    g.edges.push_back({key.first, key.second, a.sum / double(a.count), a.count});
  }
  return g;
}

struct GaspConfig {
  double merge_affinity_threshold = 0.8;
};

struct MergeStep {
  std::size_t step = 0;
  std::uint32_t cluster_a = 0;
  std::uint32_t cluster_b = 0;
  double affinity = 0.0;
};

// node label -> cluster id (cluster ids are surviving node labels)
using Clustering = std::map<std::uint32_t, std::uint32_t>;

// Greedy average linkage: repeatedly merge the cluster pair with the highest
// interface-pair-count-weighted mean affinity while it stays >= threshold.
// Ties resolve toward the lexicographically smaller cluster-id pair; a merged
// cluster keeps the smaller id.
inline Clustering gasp_average(const RegionGraph& graph, const GaspConfig& cfg,
                               std::vector<MergeStep>* trace = nullptr) {
  if (!(cfg.merge_affinity_threshold >= 0.0 && cfg.merge_affinity_threshold <= 1.0)) {
    throw grid_error("gasp_average: merge affinity threshold outside [0,1]");
  }

  struct Acc {
    double sum = 0.0;  // boundary prob * pairs
    std::uint64_t count = 0;
    double affinity() const { return 1.0 - sum / double(count); }
  };
  using Pair = std::pair<std::uint32_t, std::uint32_t>;
  std::map<Pair, Acc> edges;
  for (const RagEdge& e : graph.edges) {
    edges[{e.u, e.v}] =
        Acc{e.mean_boundary_prob * double(e.interface_voxel_pairs), e.interface_voxel_pairs};
  }

  std::map<std::uint32_t, std::uint32_t> find;  // node -> current cluster
  for (std::uint32_t n : graph.nodes) find[n] = n;
  std::map<std::uint32_t, std::vector<std::uint32_t>> members;
  for (std::uint32_t n : graph.nodes) members[n] = {n};

  struct Candidate {
    double affinity;
    Pair pair;
  };
  struct CandidateLess {
    bool operator()(const Candidate& a, const Candidate& b) const {
      if (a.affinity != b.affinity) return a.affinity < b.affinity;
      return a.pair > b.pair;  // smaller pair pops first
    }
  };
  std::priority_queue<Candidate, std::vector<Candidate>, CandidateLess> queue;
  for (const auto& [p, a] : edges) queue.push({a.affinity(), p});

  std::size_t step = 0;
  while (!queue.empty()) {
    const auto [affinity, pair] = queue.top();
    queue.pop();
    auto it = edges.find(pair);
    if (it == edges.end() || it->second.affinity() != affinity) continue;  // stale
    if (affinity < cfg.merge_affinity_threshold) break;

    const auto [keep, gone] = pair;  // pair.first < pair.second
    if (trace != nullptr) trace->push_back({step, keep, gone, affinity});
    ++step;

    // move edges of `gone` onto `keep`, count-weighted
    std::vector<std::pair<Pair, Acc>> moved;
    for (auto e = edges.begin(); e != edges.end();) {
      const auto [u, v] = e->first;
      if (u == gone || v == gone) {
        const std::uint32_t other = u == gone ? v : u;
        if (other != keep) moved.push_back({{std::min(other, keep), std::max(other, keep)}, e->second});
        e = edges.erase(e);
      } else {
        ++e;
      }
    }
    for (const auto& [p, a] : moved) {
      auto& dst = edges[p];
      dst.sum += a.sum;
      dst.count += a.count;
      queue.push({dst.affinity(), p});
    }

    auto& mk = members[keep];
    for (std::uint32_t n : members[gone]) {
      find[n] = keep;
      mk.push_back(n);
    }
    members.erase(gone);
  }
  return Clustering(find.begin(), find.end());
}

// Applies a clustering to the supervoxel grid and compacts the result.
inline LabelGrid relabel_by_clusters(const LabelGrid& supervoxels,
                                     const Clustering& clustering) {
  LabelGrid out(supervoxels.dims());
  for (std::size_t i = 0; i < supervoxels.size(); ++i) {
    const std::uint32_t s = supervoxels[i];
    if (s == 0) continue;
    const auto it = clustering.find(s);
    if (it == clustering.end()) {
      throw grid_error("relabel_by_clusters: supervoxel id " + std::to_string(s) +
                       " absent from clustering");
    }
    out[i] = it->second;
  }
  return compact_labels(out);
}

}  // namespace foramtrace
