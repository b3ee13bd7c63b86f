// Reader/writer for the NRRD subset used by the pipeline: NRRD0004 magic,
// 3-D raw little-endian payloads of uint8 (masks), uint32 (labels) or
// float (probabilities). Unknown header fields are ignored with a warning.
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "foramtrace/grid.hpp"
#include "foramtrace/log.hpp"

namespace foramtrace {

static_assert(std::endian::native == std::endian::little,
              "raw payload I/O assumes a little-endian host");

class nrrd_error : public std::runtime_error {
public:
  explicit nrrd_error(const std::string& what) : std::runtime_error(what) {}
};

namespace nrrd_detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

enum class ElemType { U8, U32, F32 };

inline std::size_t elem_size(ElemType t) {
  switch (t) {
    case ElemType::U8: return 1;
    case ElemType::U32: return 4;
    case ElemType::F32: return 4;
  }
  return 0;
}

inline std::optional<ElemType> parse_type(const std::string& v) {
  if (v == "uint8" || v == "uchar" || v == "unsigned char" || v == "uint8_t")
    return ElemType::U8;
  if (v == "uint32" || v == "uint" || v == "unsigned int" || v == "uint32_t")
    return ElemType::U32;
  if (v == "float") return ElemType::F32;
  return std::nullopt;
}

struct Header {
  ElemType type = ElemType::U8;
  Dims dims;
  bool have_type = false, have_dimension = false, have_sizes = false,
       have_encoding = false, have_endian = false;
};

inline Header parse_header(std::istream& in, const std::string& path) {
  auto fail = [&](const std::string& msg, const std::string& line = "") {
    std::string ctx = line.empty() ? "" : " (line: \"" + line + "\")";
    throw nrrd_error(path + ": " + msg + ctx);
  };

  std::string magic;
  if (!std::getline(in, magic)) fail("empty file");
  magic = trim(magic);
  if (magic != "NRRD0004") fail("unsupported magic, expected NRRD0004", magic);

  Header h;
  std::string line;
  bool terminated = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      terminated = true;
      break;
    }
    if (line[0] == '#') continue;
    if (line.find(":=") != std::string::npos) {
      log_warn(path + ": ignoring key/value line \"" + line + "\"");
      continue;
    }
    const auto colon = line.find(':');
    if (colon == std::string::npos) fail("malformed header line", line);
    const std::string key = trim(line.substr(0, colon));
    const std::string value = trim(line.substr(colon + 1));

    if (key == "type") {
      const auto t = parse_type(value);
      if (!t) fail("unsupported type \"" + value + "\"", line);
      h.type = *t;
      h.have_type = true;
    } else if (key == "dimension") {
      if (value != "3") fail("unsupported dimension \"" + value + "\", expected 3", line);
      h.have_dimension = true;
    } else if (key == "sizes") {
      std::istringstream ss(value);
      std::int64_t nx = 0, ny = 0, nz = 0;
      std::string rest;
      if (!(ss >> nx >> ny >> nz) || (ss >> rest) || nx <= 0 || ny <= 0 || nz <= 0) {
        fail("sizes must be three positive integers", line);
      }
      h.dims = {nx, ny, nz};
      h.have_sizes = true;
    } else if (key == "encoding") {
      if (value != "raw") fail("unsupported encoding \"" + value + "\"", line);
      h.have_encoding = true;
    } else if (key == "endian") {
      if (value != "little") fail("unsupported endian \"" + value + "\"", line);
      h.have_endian = true;
    } else {
      log_warn(path + ": ignoring unknown field \"" + key + "\"");
    }
  }
  if (!terminated) fail("header not terminated by blank line");
  if (!h.have_type) fail("missing required field \"type\"");
  if (!h.have_dimension) fail("missing required field \"dimension\"");
  if (!h.have_sizes) fail("missing required field \"sizes\"");
  if (!h.have_encoding) fail("missing required field \"encoding\"");
  if (h.type != ElemType::U8 && !h.have_endian) {
    fail("missing required field \"endian\" for multi-byte type");
  }
  return h;
}

template <typename T>
Grid<T> read_payload(std::istream& in, const Dims& dims, const std::string& path) {
  const std::size_t count = dims.voxel_count();
  std::vector<T> data(count);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(count * sizeof(T)));
  const auto got = static_cast<std::size_t>(in.gcount());
  if (got != count * sizeof(T)) {
    throw nrrd_error(path + ": payload has " + std::to_string(got) +
                     " bytes, expected " + std::to_string(count * sizeof(T)) +
                     " for sizes " + dims.to_string());
  }
  char extra;
  if (in.read(&extra, 1); in.gcount() != 0) {
    throw nrrd_error(path + ": payload longer than expected " +
                     std::to_string(count * sizeof(T)) + " bytes for sizes " +
                     dims.to_string());
  }
  return Grid<T>(dims, std::move(data));
}

}  // namespace nrrd_detail

inline AnyGrid read_nrrd(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw nrrd_error(path.string() + ": cannot open for reading");
  const auto h = nrrd_detail::parse_header(in, path.string());
  switch (h.type) {
    case nrrd_detail::ElemType::U8: {
      auto g = nrrd_detail::read_payload<std::uint8_t>(in, h.dims, path.string());
      validate_mask(g, path.string().c_str());
      return g;
    }
    case nrrd_detail::ElemType::U32:
      return nrrd_detail::read_payload<std::uint32_t>(in, h.dims, path.string());
    case nrrd_detail::ElemType::F32: {
      auto g = nrrd_detail::read_payload<float>(in, h.dims, path.string());
      validate_probability(g, path.string().c_str());
      return g;
    }
  }
  throw nrrd_error(path.string() + ": unreachable type");
}

inline MaskGrid read_nrrd_mask(const std::filesystem::path& path) {
  auto any = read_nrrd(path);
  if (auto* g = std::get_if<MaskGrid>(&any)) return std::move(*g);
  throw nrrd_error(path.string() + ": expected a uint8 mask volume");
}

inline LabelGrid read_nrrd_labels(const std::filesystem::path& path) {
  auto any = read_nrrd(path);
  if (auto* g = std::get_if<LabelGrid>(&any)) return std::move(*g);
  throw nrrd_error(path.string() + ": expected a uint32 label volume");
}

inline FloatGrid read_nrrd_prob(const std::filesystem::path& path) {
  auto any = read_nrrd(path);
  if (auto* g = std::get_if<FloatGrid>(&any)) return std::move(*g);
  throw nrrd_error(path.string() + ": expected a float probability volume");
}

namespace nrrd_detail {

template <typename T>
void write_impl(const Grid<T>& grid, const std::filesystem::path& path,
                const char* type_name) {
  if (!grid.dims().valid()) {
    throw nrrd_error(path.string() + ": refusing to write grid with dims " +
                     grid.dims().to_string());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw nrrd_error(path.string() + ": cannot open for writing");
  out << "NRRD0004\n"
      << "type: " << type_name << "\n"
      << "dimension: 3\n"
      << "sizes: " << grid.dims().nx << " " << grid.dims().ny << " " << grid.dims().nz
      << "\n"
      << "encoding: raw\n"
      << "endian: little\n\n";
  out.write(reinterpret_cast<const char*>(grid.values().data()),
            static_cast<std::streamsize>(grid.size() * sizeof(T)));
  if (!out) throw nrrd_error(path.string() + ": write failed");
}

}  // namespace nrrd_detail

inline void write_nrrd(const MaskGrid& grid, const std::filesystem::path& path) {
  validate_mask(grid, path.string().c_str());
  nrrd_detail::write_impl(grid, path, "uint8");
}

inline void write_nrrd(const LabelGrid& grid, const std::filesystem::path& path) {
  nrrd_detail::write_impl(grid, path, "uint32");
}

inline void write_nrrd(const FloatGrid& grid, const std::filesystem::path& path) {
  validate_probability(grid, path.string().c_str());
  nrrd_detail::write_impl(grid, path, "float");
}

inline void write_nrrd(const AnyGrid& grid, const std::filesystem::path& path) {
  std::visit([&](const auto& g) { write_nrrd(g, path); }, grid);
}

}  // namespace foramtrace
