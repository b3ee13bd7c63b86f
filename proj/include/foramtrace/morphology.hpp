// Binary morphology on voxel grids: erosion and the exact Euclidean distance
// transform (separable lower-envelope-of-parabolas, squared distances are
// exact integers). Out-of-grid voxels count as background; axes of extent 1
// contribute no border so single-slice volumes behave as 2D problems.
#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "foramtrace/grid.hpp"

namespace foramtrace {

struct ErosionSpec {
  Connectivity connectivity = Connectivity::Face6;
  int iterations = 2;
};

inline MaskGrid erode_once(const MaskGrid& mask, Connectivity conn) {
  const Dims& d = mask.dims();
  MaskGrid out(d);
  const auto offs = neighbor_offsets(conn);
  std::size_t i = 0;
  for (std::int64_t z = 0; z < d.nz; ++z) {
    for (std::int64_t y = 0; y < d.ny; ++y) {
      for (std::int64_t x = 0; x < d.nx; ++x, ++i) {
        if (mask[i] == 0) continue;
        bool keep = true;
        for (const Offset& o : offs) {
          const std::int64_t px = x + o[0], py = y + o[1], pz = z + o[2];
          if (!d.contains(px, py, pz) || mask.at(px, py, pz) == 0) {
            keep = false;
            break;
          }
        }
        out[i] = keep ? 1 : 0;
      }
    }
  }
  return out;
}

inline MaskGrid erode(const MaskGrid& mask, const ErosionSpec& spec) {
  if (spec.iterations < 1) throw grid_error("erode: iterations must be >= 1");
  validate_mask(mask, "erode input");
  MaskGrid out = erode_once(mask, spec.connectivity);
  for (int it = 1; it < spec.iterations; ++it) out = erode_once(out, spec.connectivity);
  return out;
}

namespace edt_detail {

inline constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

// 1D squared-distance lower envelope (Felzenszwalb & Huttenlocher). Parabolas
// with infinite height are skipped; n is small enough that the envelope
// intersections are exact in double arithmetic.
inline void envelope_1d(const std::int64_t* f, std::int64_t* out, std::int64_t n,
                        std::vector<std::int64_t>& v, std::vector<double>& z) {
  v.clear();
  z.clear();
  for (std::int64_t q = 0; q < n; ++q) {
    if (f[q] >= kInf) continue;
    while (!v.empty()) {
      const std::int64_t p = v.back();
      const double s = (double(f[q] + q * q) - double(f[p] + p * p)) / double(2 * (q - p));
      if (s <= z.back()) {
        v.pop_back();
        z.pop_back();
      } else {
        break;
      }
    }
    if (v.empty()) {
      v.push_back(q);
      z.push_back(-std::numeric_limits<double>::infinity());
    } else {
      const std::int64_t p = v.back();
      const double s = (double(f[q] + q * q) - double(f[p] + p * p)) / double(2 * (q - p));
      v.push_back(q);
      z.push_back(s);
    }
  }
  if (v.empty()) {
    for (std::int64_t q = 0; q < n; ++q) out[q] = kInf;
    return;
  }
  std::size_t k = 0;
  for (std::int64_t q = 0; q < n; ++q) {
    while (k + 1 < z.size() && z[k + 1] < double(q)) ++k;
    const std::int64_t p = v[k];
    out[q] = (q - p) * (q - p) + f[p];
  }
}

}  // namespace edt_detail

// Exact squared Euclidean distance to the nearest background voxel center,
// where everything outside the grid is background on axes of extent >= 2.
inline Grid<std::int64_t> distance_transform_squared(const MaskGrid& mask) {
  validate_mask(mask, "distance_transform input");
  using edt_detail::kInf;
  const Dims& d = mask.dims();
  Grid<std::int64_t> dist(d);
  for (std::size_t i = 0; i < mask.size(); ++i) dist[i] = mask[i] ? kInf : 0;

  const std::int64_t n_max = std::max({d.nx, d.ny, d.nz});
  std::vector<std::int64_t> f(n_max), g(n_max), v;
  std::vector<double> z;

  // x pass
  for (std::int64_t zz = 0; zz < d.nz; ++zz) {
    for (std::int64_t yy = 0; yy < d.ny; ++yy) {
      std::int64_t* row = &dist[d.index(0, yy, zz)];
      edt_detail::envelope_1d(row, g.data(), d.nx, v, z);
      for (std::int64_t x = 0; x < d.nx; ++x) {
        std::int64_t r = g[x];
        if (d.nx > 1) {
          r = std::min(r, (x + 1) * (x + 1));
          r = std::min(r, (d.nx - x) * (d.nx - x));
        }
        row[x] = r;
      }
    }
  }
  // y pass
  for (std::int64_t zz = 0; zz < d.nz; ++zz) {
    for (std::int64_t xx = 0; xx < d.nx; ++xx) {
      for (std::int64_t y = 0; y < d.ny; ++y) f[y] = dist[d.index(xx, y, zz)];
      edt_detail::envelope_1d(f.data(), g.data(), d.ny, v, z);
      for (std::int64_t y = 0; y < d.ny; ++y) {
        std::int64_t r = g[y];
        if (d.ny > 1) {
          r = std::min(r, (y + 1) * (y + 1));
          r = std::min(r, (d.ny - y) * (d.ny - y));
        }
        dist[d.index(xx, y, zz)] = r;
      }
    }
  }
  // z pass
  for (std::int64_t yy = 0; yy < d.ny; ++yy) {
    for (std::int64_t xx = 0; xx < d.nx; ++xx) {
      for (std::int64_t zc = 0; zc < d.nz; ++zc) f[zc] = dist[d.index(xx, yy, zc)];
      edt_detail::envelope_1d(f.data(), g.data(), d.nz, v, z);
      for (std::int64_t zc = 0; zc < d.nz; ++zc) {
        std::int64_t r = g[zc];
        if (d.nz > 1) {
          r = std::min(r, (zc + 1) * (zc + 1));
          r = std::min(r, (d.nz - zc) * (d.nz - zc));
        }
        dist[d.index(xx, yy, zc)] = r;
      }
    }
  }
  return dist;
}

// Euclidean distances in voxel units, float32.
inline FloatGrid distance_transform(const MaskGrid& mask) {
  const auto sq = distance_transform_squared(mask);
  FloatGrid out(mask.dims());
  for (std::size_t i = 0; i < sq.size(); ++i) {
    out[i] = static_cast<float>(std::sqrt(static_cast<double>(sq[i])));
  }
  return out;
}

}  // namespace foramtrace
