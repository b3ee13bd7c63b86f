// Segmentation and ordering metrics. ARI and VI are computed over the voxels
// that are foreground in either volume (background dominance would otherwise
// swamp both on mostly-empty CT volumes); entropies are natural-log.
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "foramtrace/grid.hpp"
#include "foramtrace/labeling.hpp"
#include "foramtrace/ordering.hpp"

namespace foramtrace {

inline double iou(const MaskGrid& pred, const MaskGrid& gt) {
  require_same_dims(pred.dims(), gt.dims(), "iou");
  validate_mask(pred, "iou pred");
  validate_mask(gt, "iou gt");
  std::uint64_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] != 0, g = gt[i] != 0;
    inter += (p && g) ? 1 : 0;
    uni += (p || g) ? 1 : 0;
  }
  if (uni == 0) return 1.0;  // both empty: equal masks
  return double(inter) / double(uni);
}

namespace metric_detail {

// Joint label histogram restricted to the union-foreground support; label 0
// on one side forms its own cluster there.
struct Contingency {
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> cells;
  std::map<std::uint32_t, std::uint64_t> pred_sizes;
  std::map<std::uint32_t, std::uint64_t> gt_sizes;
  std::uint64_t support = 0;
};

inline Contingency make_contingency(const LabelGrid& pred, const LabelGrid& gt) {
  require_same_dims(pred.dims(), gt.dims(), "contingency");
  Contingency c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const std::uint32_t p = pred[i], g = gt[i];
    if (p == 0 && g == 0) continue;
    ++c.cells[{p, g}];
    ++c.pred_sizes[p];
    ++c.gt_sizes[g];
    ++c.support;
  }
  return c;
}

inline double pairs2(std::uint64_t n) { return 0.5 * double(n) * double(n - 1); }

}  // namespace metric_detail

inline double adjusted_rand_index(const LabelGrid& pred, const LabelGrid& gt) {
  const auto c = metric_detail::make_contingency(pred, gt);
  if (c.support == 0) return 1.0;  // both empty: identical partitions
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [key, n] : c.cells) index += metric_detail::pairs2(n);
  for (const auto& [p, n] : c.pred_sizes) sum_a += metric_detail::pairs2(n);
  for (const auto& [g, n] : c.gt_sizes) sum_b += metric_detail::pairs2(n);
  const double total = metric_detail::pairs2(c.support);
  if (total == 0.0) return 1.0;  // single voxel
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;  // degenerate (e.g. one cluster each side)
  return (index - expected) / (max_index - expected);
}

struct VariationOfInformation {
  double vi_merge = 0.0;  // H(G|P): under-segmentation
  double vi_split = 0.0;  // H(P|G): over-segmentation
};

inline VariationOfInformation variation_of_information(const LabelGrid& pred,
                                                       const LabelGrid& gt) {
  const auto c = metric_detail::make_contingency(pred, gt);
  VariationOfInformation vi;
  if (c.support == 0) return vi;
  const double n = double(c.support);
  for (const auto& [key, nij] : c.cells) {
    const double pij = double(nij) / n;
    const double a = double(c.pred_sizes.at(key.first));
    const double b = double(c.gt_sizes.at(key.second));
    vi.vi_split += pij * std::log(b / double(nij));
    vi.vi_merge += pij * std::log(a / double(nij));
  }
  return vi;
}

struct ChamberMatch {
  std::uint32_t pred_id = 0;
  std::uint32_t gt_id = 0;
  double pred_rank = 0.0;
  double gt_rank = 0.0;
  double centroid_distance = 0.0;
};

namespace metric_detail {

// Average-tie ranks (1-based) of the given keys.
inline std::vector<double> average_ranks(const std::vector<std::size_t>& keys) {
  const std::size_t n = keys.size();
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && keys[idx[j + 1]] == keys[idx[i]]) ++j;
    const double avg = 0.5 * (double(i + 1) + double(j + 1));
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace metric_detail

// Matches each predicted chamber whose rounded centroid voxel carries a
// positive ground-truth label to that chamber. Predicted ranks follow the
// growth path; gt ranks follow the chronological order, average ranks on ties
// (several predictions can land in one gt chamber).
inline std::vector<ChamberMatch> match_chambers(const std::vector<ChamberStats>& pred_stats,
                                                const std::vector<std::uint32_t>& pred_order,
                                                const LabelGrid& gt,
                                                const std::vector<ChamberStats>& gt_stats,
                                                const std::vector<std::uint32_t>& gt_order) {
  std::map<std::uint32_t, const ChamberStats*> pred_by_id, gt_by_id;
  for (const auto& s : pred_stats) pred_by_id[s.id] = &s;
  for (const auto& s : gt_stats) gt_by_id[s.id] = &s;
  std::map<std::uint32_t, std::size_t> gt_position;
  for (std::size_t k = 0; k < gt_order.size(); ++k) gt_position[gt_order[k]] = k;

  std::vector<ChamberMatch> matches;
  std::vector<std::size_t> gt_keys;
  const Dims& d = gt.dims();
  for (const std::uint32_t pid : pred_order) {
    const auto it = pred_by_id.find(pid);
    if (it == pred_by_id.end()) continue;
    const ChamberStats& ps = *it->second;
    const std::int64_t x = std::llround(ps.centroid[0]);
    const std::int64_t y = std::llround(ps.centroid[1]);
    const std::int64_t z = std::llround(ps.centroid[2]);
    if (!d.contains(x, y, z)) continue;
    const std::uint32_t gid = gt.at(x, y, z);
    if (gid == 0) continue;
    const auto gt_it = gt_by_id.find(gid);
    const auto pos_it = gt_position.find(gid);
    if (gt_it == gt_by_id.end() || pos_it == gt_position.end()) continue;
    ChamberMatch m;
    m.pred_id = pid;
    m.gt_id = gid;
    m.pred_rank = double(matches.size() + 1);
    m.centroid_distance =
        std::sqrt(centroid_distance_sq(ps.centroid, gt_it->second->centroid));
    matches.push_back(m);
    gt_keys.push_back(pos_it->second);
  }
  const auto gt_ranks = metric_detail::average_ranks(gt_keys);
  for (std::size_t i = 0; i < matches.size(); ++i) matches[i].gt_rank = gt_ranks[i];
  return matches;
}

// Spearman rank correlation between matched orders. Uses the closed form
// 1 - 6*sum(d^2)/(M(M^2-1)) when ranks are tie-free, Pearson on average ranks
// otherwise; undefined for fewer than two matches or zero rank variance.
inline std::optional<double> spearman_ordering(const std::vector<ChamberMatch>& matches) {
  const std::size_t m = matches.size();
  if (m < 2) return std::nullopt;
  bool ties = false;
  {
    std::vector<double> sorted;
    for (const auto& mt : matches) sorted.push_back(mt.gt_rank);
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      if (sorted[i] == sorted[i - 1]) ties = true;
    }
  }
  if (!ties) {
    double sum_d2 = 0.0;
    for (const auto& mt : matches) {
      const double dd = mt.pred_rank - mt.gt_rank;
      sum_d2 += dd * dd;
    }
    const double mm = double(m);
    return 1.0 - 6.0 * sum_d2 / (mm * (mm * mm - 1.0));
  }
  double mean_p = 0.0, mean_g = 0.0;
  for (const auto& mt : matches) {
    mean_p += mt.pred_rank;
    mean_g += mt.gt_rank;
  }
  mean_p /= double(m);
  mean_g /= double(m);
  double cov = 0.0, var_p = 0.0, var_g = 0.0;
  for (const auto& mt : matches) {
    const double dp = mt.pred_rank - mean_p, dg = mt.gt_rank - mean_g;
    cov += dp * dg;
    var_p += dp * dp;
    var_g += dg * dg;
  }
  if (var_p == 0.0 || var_g == 0.0) return std::nullopt;
  return cov / std::sqrt(var_p * var_g);
}

inline std::optional<double> centroid_distance(const std::vector<ChamberMatch>& matches) {
  if (matches.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& m : matches) sum += m.centroid_distance;
  return sum / double(matches.size());
}

struct EvalReport {
  double iou = 0.0;
  double ari = 0.0;
  double vi_merge = 0.0;
  double vi_split = 0.0;
  std::uint64_t m_pred = 0;
  std::uint64_t m_gt = 0;
  std::optional<double> rho;
  std::optional<double> delta;
  std::vector<ChamberMatch> matches;
  bool duplicate_gt_matches = false;  // several predictions landed in one gt chamber
};

// Full comparison of a predicted instance labeling against ground truth.
// gt label ids are chronological by convention; pass explicit orders to
// override either side.
inline EvalReport evaluate_labels(const LabelGrid& pred, const LabelGrid& gt,
                                  std::optional<std::vector<std::uint32_t>> pred_order =
                                      std::nullopt,
                                  std::optional<std::vector<std::uint32_t>> gt_order =
                                      std::nullopt) {
  require_same_dims(pred.dims(), gt.dims(), "evaluate_labels");
  EvalReport r;
  r.iou = iou(foreground_mask(pred), foreground_mask(gt));
  r.ari = adjusted_rand_index(pred, gt);
  const auto vi = variation_of_information(pred, gt);
  r.vi_merge = vi.vi_merge;
  r.vi_split = vi.vi_split;

  std::vector<ChamberStats> pred_stats, gt_stats;
  if (max_label(pred) > 0) pred_stats = chamber_stats(pred);
  if (max_label(gt) > 0) gt_stats = chamber_stats(gt);
  r.m_pred = pred_stats.size();
  r.m_gt = gt_stats.size();

  if (!pred_stats.empty() && !gt_stats.empty()) {
    if (!pred_order) pred_order = growth_path(pred_stats).order;
    if (!gt_order) {
      gt_order = std::vector<std::uint32_t>{};
      for (const auto& s : gt_stats) gt_order->push_back(s.id);  // ids ascending
    }
    r.matches = match_chambers(pred_stats, *pred_order, gt, gt_stats, *gt_order);
    r.rho = spearman_ordering(r.matches);
    r.delta = centroid_distance(r.matches);
    std::map<std::uint32_t, int> seen;
    for (const auto& m : r.matches) {
      if (++seen[m.gt_id] > 1) r.duplicate_gt_matches = true;
    }
  }
  return r;
}

}  // namespace foramtrace
