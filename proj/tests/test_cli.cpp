#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "foramtrace/nrrd.hpp"

#ifndef FORAMTRACE_CLI_PATH
#error "FORAMTRACE_CLI_PATH must point at the built binary"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("foramtrace_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(FORAMTRACE_CLI_PATH) + " " + args + " >/dev/null 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::vector<char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::vector<char>(std::istreambuf_iterator<char>(in),
                           std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("synth-segment-order-evaluate round trip on a clean specimen", "[cli]") {
  TempDir tmp;
  const auto s = (tmp.path / "s01").string();
  REQUIRE(run_cli("synth --out-dir " + s + " --k 5 --seed 7") == 0);
  REQUIRE(fs::exists(s + "/interior.nrrd"));
  REQUIRE(fs::exists(s + "/manifest.json"));
  REQUIRE(fs::exists(s + "/run_manifest.json"));

  REQUIRE(run_cli("segment --pipeline mtl-sw --input " + s) == 0);
  REQUIRE(fs::exists(s + "/labels_mtl-sw.nrrd"));

  REQUIRE(run_cli("order --labels " + s + "/labels_mtl-sw.nrrd --out " + s + "/path.csv") ==
          0);
  REQUIRE(fs::exists(s + "/path.csv"));

  REQUIRE(run_cli("evaluate --pred " + s + "/labels_mtl-sw.nrrd --pred-path " + s +
                  "/path.csv --gt " + s + "/gt_labels.nrrd --pipeline mtl-sw --out " + s +
                  "/report.json") == 0);
  json report;
  std::ifstream(s + "/report.json") >> report;
  REQUIRE(report["ari"].get<double>() == 1.0);
  REQUIRE(report["rho"].get<double>() == 1.0);
  REQUIRE(report["delta"].get<double>() == 0.0);
  REQUIRE(report["m_pred"].get<int>() == 5);
  REQUIRE(report["pipeline"] == "mtl-sw");
}

TEST_CASE("evaluating a labeling against itself is perfect", "[cli]") {
  TempDir tmp;
  const auto s = (tmp.path / "x").string();
  REQUIRE(run_cli("synth --out-dir " + s + " --k 4 --seed 1") == 0);
  REQUIRE(run_cli("evaluate --pred " + s + "/gt_labels.nrrd --gt " + s +
                  "/gt_labels.nrrd --out " + s + "/self.json") == 0);
  json report;
  std::ifstream(s + "/self.json") >> report;
  REQUIRE(report["iou"].get<double>() == 1.0);
  REQUIRE(report["ari"].get<double>() == 1.0);
  REQUIRE(report["vi_merge"].get<double>() == 0.0);
  REQUIRE(report["vi_split"].get<double>() == 0.0);
  REQUIRE(report["rho"].get<double>() == 1.0);
  REQUIRE(report["delta"].get<double>() == 0.0);
}

TEST_CASE("usage and error exit codes are distinct", "[cli]") {
  TempDir tmp;
  REQUIRE(run_cli("segment --pipeline bogus --input " + tmp.path.string()) == 2);
  REQUIRE(run_cli("bogus-subcommand") == 2);
  REQUIRE(run_cli("order --labels /nonexistent.nrrd --out " +
                  (tmp.path / "o.csv").string()) == 3);

  // malformed volume: truncated payload
  {
    std::ofstream out(tmp.path / "bad.nrrd", std::ios::binary);
    out << "NRRD0004\ntype: uint32\ndimension: 3\nsizes: 4 4 4\nencoding: raw\n"
           "endian: little\n\nshort";
  }
  REQUIRE(run_cli("order --labels " + (tmp.path / "bad.nrrd").string() + " --out " +
                  (tmp.path / "o.csv").string()) == 4);

  // incompatible dims
  const auto a = (tmp.path / "a").string();
  const auto b = (tmp.path / "b").string();
  REQUIRE(run_cli("synth --out-dir " + a + " --k 3") == 0);
  REQUIRE(run_cli("synth --out-dir " + b + " --k 3 --nx 96") == 0);
  REQUIRE(run_cli("evaluate --pred " + a + "/gt_labels.nrrd --gt " + b +
                  "/gt_labels.nrrd --out " + (tmp.path / "r.json").string()) == 5);

  // nothing detected
  {
    foramtrace::FloatGrid zeros({16, 16, 8});
    foramtrace::write_nrrd(zeros, tmp.path / "a" / "interior.nrrd");
  }
  REQUIRE(run_cli("segment --pipeline interior-sw --input " + a) == 6);
}

TEST_CASE("batch segmentation is independent of the thread count", "[cli]") {
  TempDir tmp;
  for (int i = 0; i < 3; ++i) {
    REQUIRE(run_cli("synth --out-dir " + (tmp.path / ("s0" + std::to_string(i))).string() +
                    " --k " + std::to_string(4 + i) + " --seed " + std::to_string(i) +
                    " --noise-sigma 0.05 --blur-radius 1") == 0);
  }
  const auto out1 = tmp.path / "out1";
  const auto out4 = tmp.path / "out4";
  REQUIRE(run_cli("segment --pipeline all --input " + tmp.path.string() + " --batch " +
                  "--threads 1 --out-dir " + out1.string() + " --min-voxels 15 "
                  "--erosion-iters 1") == 0);
  REQUIRE(run_cli("segment --pipeline all --input " + tmp.path.string() + " --batch " +
                  "--threads 4 --out-dir " + out4.string() + " --min-voxels 15 "
                  "--erosion-iters 1") == 0);
  for (int i = 0; i < 3; ++i) {
    for (const std::string p : {"interior-sw", "boundary-gasp", "mtl-sw"}) {
      const auto rel = "s0" + std::to_string(i) + "/labels_" + p + ".nrrd";
      REQUIRE(slurp(out1 / rel) == slurp(out4 / rel));
    }
  }
}

TEST_CASE("re-running with the same flags reproduces outputs bit-for-bit", "[cli]") {
  TempDir tmp;
  const auto s = (tmp.path / "s").string();
  REQUIRE(run_cli("synth --out-dir " + s + " --k 4 --seed 3 --noise-sigma 0.1 "
                  "--blur-radius 1") == 0);
  REQUIRE(run_cli("segment --pipeline interior-sw --input " + s + " --erosion-iters 1 "
                  "--min-voxels 15") == 0);
  const auto first = slurp(s + "/labels_interior-sw.nrrd");
  REQUIRE(run_cli("segment --pipeline interior-sw --input " + s + " --erosion-iters 1 "
                  "--min-voxels 15") == 0);
  REQUIRE(slurp(s + "/labels_interior-sw.nrrd") == first);
  // the manifest echoes the configuration that produced the outputs
  json manifest;
  std::ifstream(s + "/run_manifest.json") >> manifest;
  REQUIRE(manifest["config"]["erosion_iters"].get<int>() == 1);
  REQUIRE(manifest["config"]["min_voxels"].get<int>() == 15);
  REQUIRE(manifest["specimens"].size() == 1);
}

TEST_CASE("report aggregates evaluation JSONs into a per-pipeline table", "[cli]") {
  TempDir tmp;
  for (int i = 0; i < 2; ++i) {
    const auto s = (tmp.path / ("s0" + std::to_string(i))).string();
    REQUIRE(run_cli("synth --out-dir " + s + " --k 4 --seed " + std::to_string(i)) == 0);
    REQUIRE(run_cli("segment --pipeline all --input " + s) == 0);
  }
  REQUIRE(run_cli("evaluate --batch --input " + tmp.path.string()) == 0);
  const auto summary = (tmp.path / "summary.csv").string();
  REQUIRE(run_cli("report --input " + tmp.path.string() + " --out " + summary) == 0);
  std::ifstream in(summary);
  std::string header;
  std::getline(in, header);
  REQUIRE(header == "pipeline,n,iou,ari,vi_merge,vi_split,m,rho,delta");
  int rows = 0;
  bool saw_each[3] = {false, false, false};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    if (line.starts_with("interior-sw,2,")) saw_each[0] = true;
    if (line.starts_with("boundary-gasp,2,")) saw_each[1] = true;
    if (line.starts_with("mtl-sw,2,")) saw_each[2] = true;
  }
  REQUIRE(rows == 3);
  REQUIRE(saw_each[0]);
  REQUIRE(saw_each[1]);
  REQUIRE(saw_each[2]);
}
