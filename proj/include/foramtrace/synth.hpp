// Synthetic specimen generator. Chambers are rasterized balls of strictly
// growing radius placed along a coiled chain: consecutive chambers sit at
// exactly (r_i + r_j + gap) * (1 - overlap), every other pair strictly
// farther apart. Because radii grow, the nearest unvisited chamber from any
// chain position is always the next one, so the chronological order is
// recoverable by the nearest-neighbor path; the generator verifies this and
// refuses infeasible specs.
//
// Each ball consists of an interior core and an outer wall band; the three
// probability maps are (interior, wall, background) class values that sum to
// one per voxel, optionally blurred (3-tap Gaussian per axis, repeated
// blur_radius times) and corrupted with additive Gaussian noise, then clipped.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "foramtrace/grid.hpp"
#include "foramtrace/losses.hpp"
#include "foramtrace/ordering.hpp"

namespace foramtrace {

class synth_error : public std::runtime_error {
public:
  explicit synth_error(const std::string& what) : std::runtime_error(what) {}
};

struct SynthSpec {
  Dims dims = {128, 128, 64};
  int chamber_count = 16;        // dataset range is 13..24
  double initial_radius = 6.0;   // full ball radius of the first chamber
  double growth_factor = 1.025;  // radius ratio between consecutive chambers
  double angular_step_deg = 20;  // base turn per placement attempt
  double z_pitch = 0.55;         // strongest out-of-plane tilt tried
  double gap = 3.5;              // background clearance between consecutive balls
  double overlap_fraction = 0.0; // in [0, 0.3]; > 0 pulls chambers together
  // Each ball's outer band is its wall; the wall has an inner and an outer
  // sub-band with different boundary weight (the inner one carries the crisp
  // wall signal, the outer one leans to the interior map). p_int = 1 - p_bnd
  // on wall voxels, so the maps sum to one everywhere by construction.
  double wall_thickness = 1.6;
  double wall_split = 0.5;            // inner sub-band fraction of the wall
  double wall_inner_boundary = 0.39;  // p_bnd in the inner sub-band
  double wall_outer_boundary = 0.39;  // p_bnd in the outer sub-band
  double noise_sigma = 0.0;
  int blur_radius = 0;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (!dims.valid()) throw synth_error("dims must be positive");
    if (chamber_count < 1) throw synth_error("chamber_count must be >= 1");
    if (!(initial_radius > 1.0)) throw synth_error("initial_radius must be > 1");
    if (!(growth_factor > 1.0)) throw synth_error("growth_factor must be > 1");
    if (!(overlap_fraction >= 0.0 && overlap_fraction <= 0.3)) {
      throw synth_error("overlap_fraction must be in [0, 0.3]");
    }
    if (!(noise_sigma >= 0.0)) throw synth_error("noise_sigma must be >= 0");
    if (blur_radius < 0) throw synth_error("blur_radius must be >= 0");
    if (!(wall_thickness > 0.5 && wall_thickness < initial_radius)) {
      throw synth_error("wall_thickness must be in (0.5, initial_radius)");
    }
    if (!(wall_split >= 0.0 && wall_split <= 1.0)) {
      throw synth_error("wall_split must be in [0,1]");
    }
    for (double b : {wall_inner_boundary, wall_outer_boundary}) {
      if (!(b >= 0.0 && b <= 1.0)) throw synth_error("wall boundary probs must be in [0,1]");
    }
  }
};

struct SynthResult {
  LabelGrid gt_labels;               // chronological ids 1..K
  ProbabilityTriplet maps;           // interior, boundary, background
  std::vector<ChamberStats> chambers;  // from the rasterized ground truth
};

namespace synth_detail {

using Vec3 = std::array<double, 3>;

inline double dist(const Vec3& a, const Vec3& b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) +
                   (a[2] - b[2]) * (a[2] - b[2]));
}

inline std::vector<Vec3> place_chain(const SynthSpec& spec, const std::vector<double>& radii) {
  const double border = 2.0;
  const Dims& d = spec.dims;
  const double shrink = 1.0 - spec.overlap_fraction;
  std::vector<Vec3> centers;
  centers.push_back({0.42 * d.nx, 0.42 * d.ny, 0.5 * d.nz});
  {
    const double r0 = radii[0];
    const Vec3& c = centers[0];
    if (c[0] < border + r0 || c[0] > d.nx - 1 - border - r0 || c[1] < border + r0 ||
        c[1] > d.ny - 1 - border - r0 || c[2] < border + r0 || c[2] > d.nz - 1 - border - r0) {
      throw synth_error("first chamber does not fit inside the grid");
    }
  }

  double heading = 10.0 * std::numbers::pi / 180.0;
  const double turn = spec.angular_step_deg * std::numbers::pi / 180.0;
  const std::array<double, 5> tilts = {0.0, 0.45 * spec.z_pitch, -0.45 * spec.z_pitch,
                                       spec.z_pitch, -spec.z_pitch};

  for (int j = 0; j + 1 < spec.chamber_count; ++j) {
    const double step = shrink * (radii[j] + radii[j + 1] + spec.gap);
    const double r = radii[j + 1];
    bool placed = false;
    for (int k = 0; k < 288 && !placed; ++k) {
      for (int sgn : {1, -1}) {
        const double ang = heading + sgn * turn * (1.0 + 0.125 * k);
        for (const double zt : tilts) {
          Vec3 dir = {std::cos(ang), std::sin(ang), zt};
          const double norm = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
          const Vec3 c = {centers.back()[0] + step * dir[0] / norm,
                          centers.back()[1] + step * dir[1] / norm,
                          centers.back()[2] + step * dir[2] / norm};
          if (c[0] < border + r || c[0] > d.nx - 1 - border - r || c[1] < border + r ||
              c[1] > d.ny - 1 - border - r || c[2] < border + r ||
              c[2] > d.nz - 1 - border - r) {
            continue;
          }
          bool ok = true;
          for (std::size_t m = 0; m + 1 < centers.size(); ++m) {
            if (dist(c, centers[m]) < shrink * (radii[m] + r + spec.gap) + 1.0) {
              ok = false;
              break;
            }
          }
          if (!ok) continue;
          centers.push_back(c);
          heading = ang;
          placed = true;
          break;
        }
        if (placed) break;
      }
    }
    if (!placed) {
      throw synth_error("spec infeasible: no room for chamber " + std::to_string(j + 2));
    }
  }

  // the growth path must be recoverable: the next chamber is strictly the
  // nearest unvisited one at every step
  for (std::size_t j = 0; j + 1 < centers.size(); ++j) {
    const double next = dist(centers[j], centers[j + 1]);
    for (std::size_t m = j + 2; m < centers.size(); ++m) {
      if (dist(centers[j], centers[m]) <= next) {
        throw synth_error("spec infeasible: chamber order not recoverable at step " +
                          std::to_string(j + 1));
      }
    }
  }
  return centers;
}

inline void blur_once(std::vector<double>& field, const Dims& d, double w) {
  // separable 3-tap [w, 1-2w, w] with replicated borders
  std::vector<double> tmp(field.size());
  auto pass = [&](int axis) {
    const std::int64_t n[3] = {d.nx, d.ny, d.nz};
    const std::int64_t stride[3] = {1, d.nx, d.nx * d.ny};
    const std::int64_t s = stride[axis], len = n[axis];
    for (std::int64_t z = 0; z < (axis == 2 ? 1 : d.nz); ++z) {
      for (std::int64_t y = 0; y < (axis == 1 ? 1 : d.ny); ++y) {
        for (std::int64_t x = 0; x < (axis == 0 ? 1 : d.nx); ++x) {
          const std::size_t base = d.index(x, y, z);
          for (std::int64_t t = 0; t < len; ++t) {
            const std::size_t i = base + std::size_t(t * s);
            const double lo = field[t > 0 ? i - std::size_t(s) : i];
            const double hi = field[t + 1 < len ? i + std::size_t(s) : i];
            tmp[i] = w * lo + (1.0 - 2.0 * w) * field[i] + w * hi;
          }
        }
      }
    }
    field.swap(tmp);
  };
  pass(0);
  pass(1);
  pass(2);
}

class GaussianSource {
public:
  explicit GaussianSource(std::uint64_t seed) : rng_(seed) {}
  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = (double(rng_() >> 11) + 1.0) * 0x1p-53;  // (0, 1]
    const double u2 = double(rng_() >> 11) * 0x1p-53;          // [0, 1)
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return mag * std::cos(2.0 * std::numbers::pi * u2);
  }

private:
  std::mt19937_64 rng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace synth_detail

inline SynthResult generate(const SynthSpec& spec) {
  spec.validate();
  const Dims& d = spec.dims;
  const int K = spec.chamber_count;

  std::vector<double> radii(K);
  for (int j = 0; j < K; ++j) radii[j] = spec.initial_radius * std::pow(spec.growth_factor, j);
  const auto centers = synth_detail::place_chain(spec, radii);

  LabelGrid labels(d);
  const std::size_t n = d.voxel_count();
  // class per voxel: 0 bg, 1 outer wall, 2 inner wall, 3 interior;
  // the more interior class wins where chambers overlap
  std::vector<std::uint8_t> cls(n, 0);
  for (int j = 0; j < K; ++j) {
    const auto& c = centers[j];
    const double r = radii[j];
    const double inner = r - spec.wall_thickness;
    const double split = r - (1.0 - spec.wall_split) * spec.wall_thickness;
    const std::int64_t x0 = std::max<std::int64_t>(0, std::int64_t(std::floor(c[0] - r)));
    const std::int64_t x1 = std::min<std::int64_t>(d.nx - 1, std::int64_t(std::ceil(c[0] + r)));
    const std::int64_t y0 = std::max<std::int64_t>(0, std::int64_t(std::floor(c[1] - r)));
    const std::int64_t y1 = std::min<std::int64_t>(d.ny - 1, std::int64_t(std::ceil(c[1] + r)));
    const std::int64_t z0 = std::max<std::int64_t>(0, std::int64_t(std::floor(c[2] - r)));
    const std::int64_t z1 = std::min<std::int64_t>(d.nz - 1, std::int64_t(std::ceil(c[2] + r)));
    for (std::int64_t z = z0; z <= z1; ++z) {
      for (std::int64_t y = y0; y <= y1; ++y) {
        for (std::int64_t x = x0; x <= x1; ++x) {
          const double dx = double(x) - c[0], dy = double(y) - c[1], dz = double(z) - c[2];
          const double dd = std::sqrt(dx * dx + dy * dy + dz * dz);
          if (dd > r) continue;
          const std::size_t i = d.index(x, y, z);
          labels[i] = std::uint32_t(j + 1);
          const std::uint8_t c_new = dd <= inner ? 3 : (dd <= split ? 2 : 1);
          cls[i] = std::max(cls[i], c_new);
        }
      }
    }
  }

  std::vector<double> p_int(n), p_bnd(n), p_bg(n);
  for (std::size_t i = 0; i < n; ++i) {
    switch (cls[i]) {
      case 3: p_int[i] = 1.0; break;
      case 2:
        p_bnd[i] = spec.wall_inner_boundary;
        p_int[i] = 1.0 - spec.wall_inner_boundary;
        break;
      case 1:
        p_bnd[i] = spec.wall_outer_boundary;
        p_int[i] = 1.0 - spec.wall_outer_boundary;
        break;
      default: p_bg[i] = 1.0; break;
    }
  }
  constexpr double kBlurWeight = 0.012;  // 3-tap Gaussian side weight per pass
  for (int it = 0; it < spec.blur_radius; ++it) {
    synth_detail::blur_once(p_int, d, kBlurWeight);
    synth_detail::blur_once(p_bnd, d, kBlurWeight);
    synth_detail::blur_once(p_bg, d, kBlurWeight);
  }

  SynthResult out{LabelGrid(d), {FloatGrid(d), FloatGrid(d), FloatGrid(d)}, {}};
  out.gt_labels = std::move(labels);
  if (spec.noise_sigma > 0.0) {
    // Per voxel, three Gaussian draws recentered to zero mean: the corruption
    // jitters the class balance the way a consistency-trained head drifts,
    // and keeps the per-voxel sum at one until clipping.
    synth_detail::GaussianSource noise(spec.rng_seed);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = noise.next(), b = noise.next(), c = noise.next();
      const double mean = (a + b + c) / 3.0;
      p_int[i] += spec.noise_sigma * (a - mean);
      p_bnd[i] += spec.noise_sigma * (b - mean);
      p_bg[i] += spec.noise_sigma * (c - mean);
    }
  }
  auto store = [&](const std::vector<double>& field, FloatGrid& g) {
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = float(std::min(1.0, std::max(0.0, field[i])));
    }
  };
  store(p_int, out.maps.interior);
  store(p_bnd, out.maps.boundary);
  store(p_bg, out.maps.background);

  out.chambers = chamber_stats(out.gt_labels);
  if (out.chambers.size() != std::size_t(K)) {
    throw synth_error("spec infeasible: a chamber was fully occluded");
  }
  for (int j = 0; j + 1 < K; ++j) {
    if (out.chambers[j].volume >= out.chambers[j + 1].volume) {
      throw synth_error("spec infeasible: volumes not strictly increasing");
    }
  }
  return out;
}

}  // namespace foramtrace
