#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "foramtrace/nrrd.hpp"
#include "oracles.hpp"

namespace ft = foramtrace;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("foramtrace_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_bytes(const fs::path& p, const std::string& header,
                 const std::vector<std::uint8_t>& payload) {
  std::ofstream out(p, std::ios::binary);
  out << header;
  out.write(reinterpret_cast<const char*>(payload.data()),
            std::streamsize(payload.size()));
}

}  // namespace

TEST_CASE("reads a minimal uint8 header", "[nrrd]") {
  TempDir tmp;
  const auto p = tmp.path / "a.nrrd";
  write_bytes(p, "NRRD0004\ntype: uint8\ndimension: 3\nsizes: 4 4 4\nencoding: raw\n\n",
              std::vector<std::uint8_t>(64, 1));
  const auto any = ft::read_nrrd(p);
  const auto* g = std::get_if<ft::MaskGrid>(&any);
  REQUIRE(g != nullptr);
  REQUIRE(g->dims() == ft::Dims{4, 4, 4});
  for (auto v : g->values()) REQUIRE(v == 1);
}

TEST_CASE("payload size mismatch is an error", "[nrrd]") {
  TempDir tmp;
  const auto p = tmp.path / "short.nrrd";
  write_bytes(p, "NRRD0004\ntype: uint8\ndimension: 3\nsizes: 2 2 2\nencoding: raw\n\n",
              std::vector<std::uint8_t>(7, 0));
  REQUIRE_THROWS_AS(ft::read_nrrd(p), ft::nrrd_error);
  const auto p2 = tmp.path / "long.nrrd";
  write_bytes(p2, "NRRD0004\ntype: uint8\ndimension: 3\nsizes: 2 2 2\nencoding: raw\n\n",
              std::vector<std::uint8_t>(9, 0));
  REQUIRE_THROWS_AS(ft::read_nrrd(p2), ft::nrrd_error);
}

TEST_CASE("malformed headers are rejected with context", "[nrrd]") {
  TempDir tmp;
  auto expect_throw = [&](const std::string& header) {
    const auto p = tmp.path / "bad.nrrd";
    write_bytes(p, header, std::vector<std::uint8_t>(8, 0));
    REQUIRE_THROWS_AS(ft::read_nrrd(p), ft::nrrd_error);
  };
  expect_throw("NRRD0002\ntype: uint8\ndimension: 3\nsizes: 2 2 2\nencoding: raw\n\n");
  expect_throw("NRRD0004\ntype: int16\ndimension: 3\nsizes: 2 2 2\nencoding: raw\n\n");
  expect_throw("NRRD0004\ntype: uint8\ndimension: 2\nsizes: 2 2 2\nencoding: raw\n\n");
  expect_throw("NRRD0004\ntype: uint8\ndimension: 3\nsizes: 2 -2 2\nencoding: raw\n\n");
  expect_throw("NRRD0004\ntype: uint8\ndimension: 3\nsizes: 2 2 2\nencoding: gzip\n\n");
  expect_throw("NRRD0004\ntype: uint8\ndimension: 3\nsizes: 2 2 2\nencoding: raw\n");
  expect_throw("NRRD0004\ntype: float\ndimension: 3\nsizes: 2 2 2\nencoding: raw\n\n");
  expect_throw("NRRD0004\ntype: uint8\nsizes: 2 2 2\nencoding: raw\n\n");
  try {
    const auto p = tmp.path / "ctx.nrrd";
    write_bytes(p, "NRRD0004\ntype: int16\ndimension: 3\nsizes: 2 2 2\nencoding: raw\n\n",
                std::vector<std::uint8_t>(8, 0));
    ft::read_nrrd(p);
    FAIL("expected nrrd_error");
  } catch (const ft::nrrd_error& e) {
    REQUIRE(std::string(e.what()).find("int16") != std::string::npos);
  }
}

TEST_CASE("unknown fields are ignored", "[nrrd]") {
  TempDir tmp;
  const auto p = tmp.path / "extra.nrrd";
  write_bytes(p,
              "NRRD0004\n# a comment\ntype: uint8\ndimension: 3\nsizes: 2 2 2\n"
              "space directions: (1,0,0) (0,1,0) (0,0,1)\nencoding: raw\nfoo:=bar\n\n",
              std::vector<std::uint8_t>(8, 1));
  REQUIRE_NOTHROW(ft::read_nrrd(p));
}

TEST_CASE("round-trip is bit-exact for all three element kinds", "[nrrd]") {
  TempDir tmp;
  const ft::Dims dims{6, 5, 4};

  const auto mask = oracles::random_mask(dims, 0.4, 1);
  ft::write_nrrd(mask, tmp.path / "m.nrrd");
  REQUIRE(ft::read_nrrd_mask(tmp.path / "m.nrrd") == mask);

  const auto labels = oracles::random_labels(dims, 9, 0.5, 2);
  ft::write_nrrd(labels, tmp.path / "l.nrrd");
  REQUIRE(ft::read_nrrd_labels(tmp.path / "l.nrrd") == labels);

  const auto prob = oracles::random_prob(dims, 3);
  ft::write_nrrd(prob, tmp.path / "p.nrrd");
  REQUIRE(ft::read_nrrd_prob(tmp.path / "p.nrrd") == prob);
}

TEST_CASE("write rejects invalid grids", "[nrrd]") {
  TempDir tmp;
  ft::FloatGrid bad({2, 1, 1}, std::vector<float>{0.5f, 1.5f});
  REQUIRE_THROWS_AS(ft::write_nrrd(bad, tmp.path / "bad.nrrd"), ft::grid_error);
  ft::MaskGrid bad_mask({2, 1, 1}, std::vector<std::uint8_t>{0, 3});
  REQUIRE_THROWS_AS(ft::write_nrrd(bad_mask, tmp.path / "bad2.nrrd"), ft::grid_error);
}

TEST_CASE("all-zero label grid survives a round trip", "[nrrd]") {
  TempDir tmp;
  const ft::LabelGrid zeros({3, 3, 3});
  ft::write_nrrd(zeros, tmp.path / "z.nrrd");
  const auto back = ft::read_nrrd_labels(tmp.path / "z.nrrd");
  REQUIRE(back == zeros);
}

TEST_CASE("kind helpers reject mismatched payload types", "[nrrd]") {
  TempDir tmp;
  const ft::LabelGrid labels({2, 2, 2}, std::vector<std::uint32_t>(8, 5));
  ft::write_nrrd(labels, tmp.path / "l.nrrd");
  REQUIRE_THROWS_AS(ft::read_nrrd_mask(tmp.path / "l.nrrd"), ft::nrrd_error);
  REQUIRE_THROWS_AS(ft::read_nrrd_prob(tmp.path / "l.nrrd"), ft::nrrd_error);
}

TEST_CASE("missing file reports a readable error", "[nrrd]") {
  REQUIRE_THROWS_AS(ft::read_nrrd("/nonexistent/foo.nrrd"), ft::nrrd_error);
}
