// Dense 3D voxel grids (mask / label / probability), connectivity tables and
// flat-index helpers shared by every other module. Storage is x-fastest
// row-major, matching the on-disk NRRD layout.
#pragma once

#include <array>
#include <cstdint>
#include <cstddef>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace foramtrace {

class grid_error : public std::runtime_error {
public:
  explicit grid_error(const std::string& what) : std::runtime_error(what) {}
};

struct Dims {
  std::int64_t nx = 0;
  std::int64_t ny = 0;
  std::int64_t nz = 0;

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
           static_cast<std::size_t>(nz);
  }
  bool operator==(const Dims&) const = default;
  bool valid() const { return nx > 0 && ny > 0 && nz > 0; }
  bool contains(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return x >= 0 && x < nx && y >= 0 && y < ny && z >= 0 && z < nz;
  }
  std::size_t index(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return static_cast<std::size_t>((z * ny + y) * nx + x);
  }
  std::array<std::int64_t, 3> coords(std::size_t i) const {
    const auto n = static_cast<std::int64_t>(i);
    return {n % nx, (n / nx) % ny, n / (nx * ny)};
  }
  std::string to_string() const {
    return std::to_string(nx) + "x" + std::to_string(ny) + "x" + std::to_string(nz);
  }
};

inline void require_same_dims(const Dims& a, const Dims& b, const char* where) {
  if (!(a == b)) {
    throw grid_error(std::string(where) + ": dimension mismatch " + a.to_string() +
                     " vs " + b.to_string());
  }
}

template <typename T>
class Grid {
public:
  Grid() = default;
  Grid(Dims dims, T fill = T{}) : dims_(dims), data_(check_count(dims), fill) {}
  Grid(Dims dims, std::vector<T> data) : dims_(dims), data_(std::move(data)) {
    if (data_.size() != check_count(dims)) {
      throw grid_error("grid data length " + std::to_string(data_.size()) +
                       " does not match dims " + dims.to_string());
    }
  }

  const Dims& dims() const { return dims_; }
  std::size_t size() const { return data_.size(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  T& at(std::int64_t x, std::int64_t y, std::int64_t z) { return data_[dims_.index(x, y, z)]; }
  const T& at(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return data_[dims_.index(x, y, z)];
  }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  bool operator==(const Grid&) const = default;

private:
  static std::size_t check_count(const Dims& dims) {
    if (!dims.valid()) {
      throw grid_error("grid dims must be positive, got " + dims.to_string());
    }
    return dims.voxel_count();
  }

  Dims dims_;
  std::vector<T> data_;
};

using MaskGrid = Grid<std::uint8_t>;    // elements in {0,1}
using LabelGrid = Grid<std::uint32_t>;  // 0 = background
using FloatGrid = Grid<float>;          // probabilities or scalar fields

// A grid as read from / written to file; the payload type decides the kind.
using AnyGrid = std::variant<MaskGrid, LabelGrid, FloatGrid>;

inline void validate_mask(const MaskGrid& g, const char* where = "mask") {
  for (std::uint8_t v : g.values()) {
    if (v > 1) {
      throw grid_error(std::string(where) + ": mask element " + std::to_string(int(v)) +
                       " outside {0,1}");
    }
  }
}

inline void validate_probability(const FloatGrid& g, const char* where = "probability") {
  for (float v : g.values()) {
    if (!(v >= 0.0f && v <= 1.0f)) {  // also rejects NaN
      throw grid_error(std::string(where) + ": element " + std::to_string(v) +
                       " outside [0,1]");
    }
  }
}

enum class Connectivity { Face6, Edge18, Vertex26 };

using Offset = std::array<int, 3>;

namespace detail {
inline constexpr std::array<Offset, 6> kFace6 = {{
    {-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1},
}};

inline constexpr std::array<Offset, 26> kVertex26 = [] {
  std::array<Offset, 26> out{};
  std::size_t n = 0;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx)
        if (dx != 0 || dy != 0 || dz != 0) out[n++] = {dx, dy, dz};
  return out;
}();

inline constexpr std::array<Offset, 18> kEdge18 = [] {
  std::array<Offset, 18> out{};
  std::size_t n = 0;
  for (const Offset& o : kVertex26) {
    const int manhattan = std::abs(o[0]) + std::abs(o[1]) + std::abs(o[2]);
    if (manhattan <= 2) out[n++] = o;
  }
  return out;
}();
}  // namespace detail

inline std::span<const Offset> neighbor_offsets(Connectivity conn) {
  switch (conn) {
    case Connectivity::Face6: return detail::kFace6;
    case Connectivity::Edge18: return detail::kEdge18;
    case Connectivity::Vertex26: return detail::kVertex26;
  }
  throw grid_error("unknown connectivity");
}

inline const char* connectivity_name(Connectivity conn) {
  switch (conn) {
    case Connectivity::Face6: return "face6";
    case Connectivity::Edge18: return "edge18";
    case Connectivity::Vertex26: return "vertex26";
  }
  return "?";
}

// Binary mask from a probability field: out = 1 iff p >= tau. The boundary
// value is included so tau = 0 selects the full domain.
inline MaskGrid threshold(const FloatGrid& prob, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw grid_error("threshold: tau " + std::to_string(tau) + " outside [0,1]");
  }
  validate_probability(prob, "threshold input");
  MaskGrid out(prob.dims());
  const auto src = prob.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    out[i] = static_cast<double>(src[i]) >= tau ? 1 : 0;
  }
  return out;
}

}  // namespace foramtrace
