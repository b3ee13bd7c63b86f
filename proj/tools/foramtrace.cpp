// foramtrace command-line tool: generate synthetic specimens, run the three
// instance-segmentation pipelines, reconstruct growth paths, evaluate against
// ground truth and summarize reports. All commands write a run manifest with
// the echoed configuration so any run can be reproduced bit-for-bit.
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "foramtrace/foramtrace.hpp"
#include "foramtrace/log.hpp"

namespace ft = foramtrace;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode {
  kOk = 0,
  kUsage = 2,
  kMissingFile = 3,
  kMalformedVolume = 4,
  kIncompatibleInput = 5,
  kNothingDetected = 6,
  kInternal = 7,
};

struct CliError {
  int code;
  std::string kind;
  std::string message;
};

void emit_error(const CliError& e) {
  json j;
  j["error"] = {{"code", e.code}, {"kind", e.kind}, {"message", e.message}};
  std::cerr << j.dump() << "\n";
}

fs::path require_exists(const fs::path& p) {
  if (!fs::exists(p)) throw CliError{kMissingFile, "missing_file", p.string() + ": not found"};
  return p;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw CliError{kInternal, "io", path.string() + ": cannot open for writing"};
  out << text;
  if (!out) throw CliError{kInternal, "io", path.string() + ": write failed"};
}

void write_manifest(const fs::path& out_dir, const std::string& command, const json& config,
                    const json& specimens) {
  json m;
  m["tool"] = "foramtrace";
  m["version"] = ft::kVersion;
  m["command"] = command;
  m["config"] = config;
  m["specimens"] = specimens;
  write_text(out_dir / "run_manifest.json", m.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  ft::SynthSpec spec;
  std::string out_dir;
};

json spec_to_json(const ft::SynthSpec& s) {
  return json{{"dims", {s.dims.nx, s.dims.ny, s.dims.nz}},
              {"chamber_count", s.chamber_count},
              {"initial_radius", s.initial_radius},
              {"growth_factor", s.growth_factor},
              {"angular_step_deg", s.angular_step_deg},
              {"z_pitch", s.z_pitch},
              {"gap", s.gap},
              {"overlap_fraction", s.overlap_fraction},
              {"wall_thickness", s.wall_thickness},
              {"wall_split", s.wall_split},
              {"wall_inner_boundary", s.wall_inner_boundary},
              {"wall_outer_boundary", s.wall_outer_boundary},
              {"noise_sigma", s.noise_sigma},
              {"blur_radius", s.blur_radius},
              {"rng_seed", s.rng_seed}};
}

int cmd_synth(const SynthArgs& args) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir(args.out_dir);
  fs::create_directories(dir);
  const ft::SynthResult result = ft::generate(args.spec);

  ft::write_nrrd(result.gt_labels, dir / "gt_labels.nrrd");
  ft::write_nrrd(result.maps.interior, dir / "interior.nrrd");
  ft::write_nrrd(result.maps.boundary, dir / "boundary.nrrd");
  ft::write_nrrd(result.maps.background, dir / "background.nrrd");

  json chambers = json::array();
  for (const auto& c : result.chambers) {
    chambers.push_back({{"id", c.id},
                        {"volume_voxels", c.volume},
                        {"centroid", {c.centroid[0], c.centroid[1], c.centroid[2]}}});
  }
  json manifest;
  manifest["spec"] = spec_to_json(args.spec);
  manifest["chambers"] = chambers;
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");

  json specimen = {{"path", dir.string()},
                   {"outputs", {"gt_labels.nrrd", "interior.nrrd", "boundary.nrrd",
                                "background.nrrd", "manifest.json"}},
                   {"elapsed_ms", elapsed_ms(t0)}};
  write_manifest(dir, "synth", spec_to_json(args.spec), json::array({specimen}));
  std::cout << "wrote specimen with " << result.chambers.size() << " chambers to "
            << dir.string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// segment

struct SegmentArgs {
  std::string pipeline = "interior-sw";  // or boundary-gasp | mtl-sw | all
  std::string input;
  std::string out_dir;  // empty: write next to inputs
  std::string interior_path, boundary_path, background_path;
  bool batch = false;
  int threads = 4;
  bool merge_trace = false;
  ft::PipelineConfig cfg;
};

json pipeline_config_json(const ft::PipelineConfig& c) {
  return json{{"tau_interior", c.tau_interior},
              {"tau_boundary_plantseg", c.tau_boundary_plantseg},
              {"tau1", c.tau1},
              {"tau2", c.tau2},
              {"tau3", c.tau3},
              {"erosion_iters", c.erosion.iterations},
              {"erosion_connectivity", ft::connectivity_name(c.erosion.connectivity)},
              {"min_voxels", c.min_voxels},
              {"merge_affinity", c.gasp.merge_affinity_threshold}};
}

std::vector<ft::PipelineVariant> parse_pipelines(const std::string& name) {
  if (name == "interior-sw") return {ft::PipelineVariant::InteriorSW};
  if (name == "boundary-gasp") return {ft::PipelineVariant::BoundaryGASP};
  if (name == "mtl-sw") return {ft::PipelineVariant::MtlSW};
  if (name == "all")
    return {ft::PipelineVariant::InteriorSW, ft::PipelineVariant::BoundaryGASP,
            ft::PipelineVariant::MtlSW};
  throw CliError{kUsage, "usage",
                 "unknown pipeline \"" + name +
                     "\" (expected interior-sw, boundary-gasp, mtl-sw or all)"};
}

json segment_one(const fs::path& in_dir, const fs::path& out_dir, const SegmentArgs& args) {
  json entry;
  entry["specimen"] = in_dir.string();
  fs::create_directories(out_dir);
  for (const ft::PipelineVariant variant : parse_pipelines(args.pipeline)) {
    const auto t0 = std::chrono::steady_clock::now();
    ft::LabelGrid labels;
    std::vector<ft::MergeStep> trace;
    switch (variant) {
      case ft::PipelineVariant::InteriorSW: {
        const fs::path p = args.interior_path.empty() ? in_dir / "interior.nrrd"
                                                      : fs::path(args.interior_path);
        labels = ft::run_interior_sw(ft::read_nrrd_prob(require_exists(p)), args.cfg);
        break;
      }
      case ft::PipelineVariant::BoundaryGASP: {
        const fs::path p = args.boundary_path.empty() ? in_dir / "boundary.nrrd"
                                                      : fs::path(args.boundary_path);
        labels = ft::run_boundary_gasp(ft::read_nrrd_prob(require_exists(p)), args.cfg,
                                       args.merge_trace ? &trace : nullptr);
        break;
      }
      case ft::PipelineVariant::MtlSW: {
        const fs::path pi = args.interior_path.empty() ? in_dir / "interior.nrrd"
                                                       : fs::path(args.interior_path);
        const fs::path pb = args.boundary_path.empty() ? in_dir / "boundary.nrrd"
                                                       : fs::path(args.boundary_path);
        const fs::path pg = args.background_path.empty() ? in_dir / "background.nrrd"
                                                         : fs::path(args.background_path);
        ft::ProbabilityTriplet maps{ft::read_nrrd_prob(require_exists(pi)),
                                    ft::read_nrrd_prob(require_exists(pb)),
                                    ft::read_nrrd_prob(require_exists(pg))};
        labels = ft::run_mtl_sw(maps, args.cfg);
        break;
      }
    }
    const std::string name = ft::pipeline_name(variant);
    const fs::path out_path = out_dir / ("labels_" + name + ".nrrd");
    ft::write_nrrd(labels, out_path);
    if (args.merge_trace && variant == ft::PipelineVariant::BoundaryGASP) {
      std::ostringstream csv;
      csv << "step,cluster_a,cluster_b,affinity\n";
      csv.precision(10);
      for (const auto& s : trace) {
        csv << s.step << "," << s.cluster_a << "," << s.cluster_b << "," << s.affinity << "\n";
      }
      write_text(out_dir / ("merge_trace_" + name + ".csv"), csv.str());
    }
    entry[name] = {{"labels", out_path.string()},
                   {"detected", ft::max_label(labels)},
                   {"elapsed_ms", elapsed_ms(t0)}};
  }
  return entry;
}

std::vector<fs::path> specimen_dirs(const fs::path& parent) {
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(parent)) {
    if (e.is_directory() && (fs::exists(e.path() / "interior.nrrd") ||
                             fs::exists(e.path() / "boundary.nrrd"))) {
      dirs.push_back(e.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) {
    throw CliError{kMissingFile, "missing_file",
                   parent.string() + ": no specimen directories found"};
  }
  return dirs;
}

// Fan out over specimens; results land in per-specimen slots so the manifest
// is independent of scheduling order.
template <typename Fn>
json run_batch(const std::vector<fs::path>& dirs, int threads, Fn&& fn) {
  std::vector<json> slots(dirs.size());
  std::vector<std::string> failures(dirs.size());
  std::atomic<std::size_t> next{0};
  const int n_workers = std::max(1, std::min<int>(threads, int(dirs.size())));
  std::vector<std::thread> workers;
  for (int w = 0; w < n_workers; ++w) {
    workers.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= dirs.size()) return;
        try {
          slots[i] = fn(dirs[i]);
        } catch (const CliError& e) {
          failures[i] = e.message;
        } catch (const std::exception& e) {
          failures[i] = e.what();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    if (!failures[i].empty()) {
      throw CliError{kInternal, "batch", dirs[i].string() + ": " + failures[i]};
    }
  }
  json out = json::array();
  for (auto& s : slots) out.push_back(std::move(s));
  return out;
}

int cmd_segment(const SegmentArgs& args) {
  const fs::path input = require_exists(args.input);
  json specimens;
  fs::path manifest_dir;
  if (args.batch) {
    const auto dirs = specimen_dirs(input);
    manifest_dir = args.out_dir.empty() ? input : fs::path(args.out_dir);
    fs::create_directories(manifest_dir);
    specimens = run_batch(dirs, args.threads, [&](const fs::path& d) {
      const fs::path out =
          args.out_dir.empty() ? d : fs::path(args.out_dir) / d.filename();
      return segment_one(d, out, args);
    });
  } else {
    const fs::path in_dir = fs::is_directory(input) ? input : input.parent_path();
    manifest_dir = args.out_dir.empty() ? in_dir : fs::path(args.out_dir);
    fs::create_directories(manifest_dir);
    specimens = json::array({segment_one(in_dir, manifest_dir, args)});
  }
  json config = pipeline_config_json(args.cfg);
  config["pipeline"] = args.pipeline;
  config["threads"] = args.threads;
  write_manifest(manifest_dir, "segment", config, specimens);
  std::cout << "segmented " << specimens.size() << " specimen(s)\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// order

int cmd_order(const std::string& labels_path, const std::string& out_path) {
  const auto labels = ft::read_nrrd_labels(require_exists(labels_path));
  if (ft::max_label(labels) == 0) {
    throw CliError{kNothingDetected, "no_chambers", labels_path + ": labeling is empty"};
  }
  const auto stats = ft::chamber_stats(labels);
  const auto path = ft::growth_path(stats);
  std::ostringstream csv;
  ft::write_growth_path_csv(stats, path, csv);
  write_text(out_path, csv.str());
  std::cout << "ordered " << stats.size() << " chambers -> " << out_path << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// evaluate

std::vector<std::uint32_t> read_order_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw CliError{kMissingFile, "missing_file", path.string() + ": cannot open"};
  std::vector<std::uint32_t> order;
  std::string line;
  int id_col = -1;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (first) {
      first = false;
      for (std::size_t c = 0; c < cells.size(); ++c) {
        if (cells[c] == "chamber_id") id_col = int(c);
      }
      if (id_col >= 0) continue;  // header row
      id_col = cells.size() > 1 ? 1 : 0;
    }
    if (id_col >= int(cells.size())) {
      throw CliError{kIncompatibleInput, "bad_csv",
                     path.string() + ": missing chamber_id column in \"" + line + "\""};
    }
    order.push_back(std::uint32_t(std::stoul(cells[std::size_t(id_col)])));
  }
  if (order.empty()) {
    throw CliError{kIncompatibleInput, "bad_csv", path.string() + ": no rows"};
  }
  return order;
}

json report_to_json(const ft::EvalReport& r) {
  json j;
  j["iou"] = r.iou;
  j["ari"] = r.ari;
  j["vi_merge"] = r.vi_merge;
  j["vi_split"] = r.vi_split;
  j["m_pred"] = r.m_pred;
  j["m_gt"] = r.m_gt;
  j["rho"] = r.rho ? json(*r.rho) : json(nullptr);
  j["delta"] = r.delta ? json(*r.delta) : json(nullptr);
  j["duplicate_gt_matches"] = r.duplicate_gt_matches;
  j["matches"] = json::array();
  for (const auto& m : r.matches) {
    j["matches"].push_back({{"pred_id", m.pred_id},
                            {"gt_id", m.gt_id},
                            {"pred_rank", m.pred_rank},
                            {"gt_rank", m.gt_rank},
                            {"centroid_distance", m.centroid_distance}});
  }
  return j;
}

struct EvaluateArgs {
  std::string pred, gt, pred_path_csv, gt_order_csv, out, pipeline_tag;
  std::string input;  // batch parent
  bool batch = false;
  int threads = 4;
};

json evaluate_one(const fs::path& pred_path, const fs::path& gt_path,
                  const std::optional<std::vector<std::uint32_t>>& pred_order,
                  const std::optional<std::vector<std::uint32_t>>& gt_order,
                  const std::string& tag, const fs::path& out_path) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto pred = ft::read_nrrd_labels(require_exists(pred_path));
  const auto gt = ft::read_nrrd_labels(require_exists(gt_path));
  const ft::EvalReport report = ft::evaluate_labels(pred, gt, pred_order, gt_order);
  json j = report_to_json(report);
  j["pipeline"] = tag.empty() ? "unknown" : tag;
  j["pred"] = pred_path.string();
  j["gt"] = gt_path.string();
  write_text(out_path, j.dump(2) + "\n");
  return json{{"report", out_path.string()},
              {"ari", report.ari},
              {"elapsed_ms", elapsed_ms(t0)}};
}

int cmd_evaluate(const EvaluateArgs& args) {
  json specimens = json::array();
  fs::path manifest_dir;
  if (args.batch) {
    const fs::path input = require_exists(args.input);
    manifest_dir = input;
    const auto dirs = specimen_dirs(input);
    const auto tags = args.pipeline_tag.empty()
                          ? std::vector<std::string>{"interior-sw", "boundary-gasp", "mtl-sw"}
                          : std::vector<std::string>{args.pipeline_tag};
    specimens = run_batch(dirs, args.threads, [&](const fs::path& d) {
      json entry;
      entry["specimen"] = d.string();
      for (const auto& tag : tags) {
        const fs::path pred = d / ("labels_" + tag + ".nrrd");
        if (!fs::exists(pred)) continue;
        entry[tag] = evaluate_one(pred, d / "gt_labels.nrrd", std::nullopt, std::nullopt, tag,
                                  d / ("report_" + tag + ".json"));
      }
      return entry;
    });
  } else {
    std::optional<std::vector<std::uint32_t>> pred_order, gt_order;
    if (!args.pred_path_csv.empty()) pred_order = read_order_csv(args.pred_path_csv);
    if (!args.gt_order_csv.empty()) gt_order = read_order_csv(args.gt_order_csv);
    const fs::path out =
        args.out.empty() ? fs::path(args.pred).replace_extension(".report.json")
                         : fs::path(args.out);
    manifest_dir = out.parent_path().empty() ? fs::path(".") : out.parent_path();
    specimens.push_back(evaluate_one(args.pred, args.gt, pred_order, gt_order,
                                     args.pipeline_tag, out));
  }
  write_manifest(manifest_dir, "evaluate",
                 json{{"pipeline", args.pipeline_tag.empty() ? "all" : args.pipeline_tag}},
                 specimens);
  std::cout << "evaluated " << specimens.size() << " item(s)\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// report

int cmd_report(const std::string& input, const std::string& out_path) {
  const fs::path root = require_exists(input);
  struct Agg {
    std::size_t n = 0;
    double iou = 0, ari = 0, vi_merge = 0, vi_split = 0, m = 0;
    std::size_t n_rho = 0, n_delta = 0;
    double rho = 0, delta = 0;
  };
  std::map<std::string, Agg> groups;
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.starts_with("report") && name.ends_with(".json")) {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw CliError{kMissingFile, "missing_file",
                   input + ": no report*.json files found"};
  }
  for (const auto& f : files) {
    std::ifstream in(f);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw CliError{kIncompatibleInput, "bad_json", f.string() + ": " + e.what()};
    }
    Agg& a = groups[j.value("pipeline", "unknown")];
    ++a.n;
    a.iou += j.value("iou", 0.0);
    a.ari += j.value("ari", 0.0);
    a.vi_merge += j.value("vi_merge", 0.0);
    a.vi_split += j.value("vi_split", 0.0);
    a.m += j.value("m_pred", 0.0);
    if (j.contains("rho") && !j["rho"].is_null()) {
      a.rho += j["rho"].get<double>();
      ++a.n_rho;
    }
    if (j.contains("delta") && !j["delta"].is_null()) {
      a.delta += j["delta"].get<double>();
      ++a.n_delta;
    }
  }
  std::ostringstream csv;
  csv.precision(6);
  csv << "pipeline,n,iou,ari,vi_merge,vi_split,m,rho,delta\n";
  for (const auto& [name, a] : groups) {
    csv << name << "," << a.n << "," << a.iou / a.n << "," << a.ari / a.n << ","
        << a.vi_merge / a.n << "," << a.vi_split / a.n << "," << a.m / a.n << ",";
    if (a.n_rho > 0) csv << a.rho / double(a.n_rho);
    csv << ",";
    if (a.n_delta > 0) csv << a.delta / double(a.n_delta);
    csv << "\n";
  }
  write_text(out_path, csv.str());
  std::cout << csv.str();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"foramtrace: chamber instance segmentation and growth-path tools"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "generate a synthetic specimen");
  c_synth->add_option("--out-dir", synth.out_dir, "output directory")->required();
  c_synth->add_option("--k", synth.spec.chamber_count, "chamber count");
  c_synth->add_option("--seed", synth.spec.rng_seed, "noise rng seed");
  c_synth->add_option("--nx", synth.spec.dims.nx, "grid size x");
  c_synth->add_option("--ny", synth.spec.dims.ny, "grid size y");
  c_synth->add_option("--nz", synth.spec.dims.nz, "grid size z");
  c_synth->add_option("--noise-sigma", synth.spec.noise_sigma, "gaussian noise sigma");
  c_synth->add_option("--blur-radius", synth.spec.blur_radius, "blur passes");
  c_synth->add_option("--overlap", synth.spec.overlap_fraction, "overlap fraction [0,0.3]");
  c_synth->add_option("--initial-radius", synth.spec.initial_radius, "first chamber radius");
  c_synth->add_option("--growth", synth.spec.growth_factor, "radius growth per chamber");
  c_synth->add_option("--gap", synth.spec.gap, "clearance between consecutive chambers");
  c_synth->add_option("--wall-thickness", synth.spec.wall_thickness, "wall band thickness");
  c_synth->add_option("--wall-inner-bnd", synth.spec.wall_inner_boundary,
                      "boundary probability in the inner wall sub-band");
  c_synth->add_option("--wall-outer-bnd", synth.spec.wall_outer_boundary,
                      "boundary probability in the outer wall sub-band");

  SegmentArgs seg;
  auto* c_seg = app.add_subcommand("segment", "run an instance-segmentation pipeline");
  c_seg->add_option("--pipeline", seg.pipeline,
                    "interior-sw | boundary-gasp | mtl-sw | all")
      ->required();
  c_seg->add_option("--input", seg.input, "specimen directory (or parent with --batch)")
      ->required();
  c_seg->add_option("--out-dir", seg.out_dir, "output directory (default: input)");
  c_seg->add_option("--interior", seg.interior_path, "interior probability NRRD");
  c_seg->add_option("--boundary", seg.boundary_path, "boundary probability NRRD");
  c_seg->add_option("--background", seg.background_path, "background probability NRRD");
  c_seg->add_flag("--batch", seg.batch, "treat --input as a directory of specimens");
  c_seg->add_option("--threads", seg.threads, "batch worker threads");
  c_seg->add_flag("--merge-trace", seg.merge_trace, "write GASP merge trace CSV");
  c_seg->add_option("--tau-interior", seg.cfg.tau_interior, "interior-sw threshold");
  c_seg->add_option("--tau-boundary", seg.cfg.tau_boundary_plantseg,
                    "boundary-gasp threshold");
  c_seg->add_option("--tau1", seg.cfg.tau1, "mtl-sw interior threshold");
  c_seg->add_option("--tau2", seg.cfg.tau2, "mtl-sw boundary threshold");
  c_seg->add_option("--tau3", seg.cfg.tau3, "mtl-sw background threshold");
  c_seg->add_option("--erosion-iters", seg.cfg.erosion.iterations, "marker erosion passes");
  c_seg->add_option("--min-voxels", seg.cfg.min_voxels, "minimum component size");
  c_seg->add_option("--merge-affinity", seg.cfg.gasp.merge_affinity_threshold,
                    "GASP merge affinity threshold");

  std::string order_labels, order_out = "growth_path.csv";
  auto* c_order = app.add_subcommand("order", "reconstruct the chamber growth path");
  c_order->add_option("--labels", order_labels, "instance label NRRD")->required();
  c_order->add_option("--out", order_out, "output CSV path");

  EvaluateArgs ev;
  auto* c_eval = app.add_subcommand("evaluate", "compare labels against ground truth");
  c_eval->add_option("--pred", ev.pred, "predicted label NRRD");
  c_eval->add_option("--gt", ev.gt, "ground-truth label NRRD");
  c_eval->add_option("--pred-path", ev.pred_path_csv, "growth-path CSV for predictions");
  c_eval->add_option("--gt-order", ev.gt_order_csv, "chronological order CSV for gt");
  c_eval->add_option("--out", ev.out, "output report JSON");
  c_eval->add_option("--pipeline", ev.pipeline_tag, "pipeline tag recorded in the report");
  c_eval->add_flag("--batch", ev.batch, "evaluate every specimen under --input");
  c_eval->add_option("--input", ev.input, "parent directory for --batch");
  c_eval->add_option("--threads", ev.threads, "batch worker threads");

  std::string report_input, report_out = "summary.csv";
  auto* c_report = app.add_subcommand("report", "summarize evaluation reports");
  c_report->add_option("--input", report_input, "directory containing report JSONs")
      ->required();
  c_report->add_option("--out", report_out, "output summary CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    emit_error({kUsage, "usage", e.what()});
    return kUsage;
  }

  try {
    if (c_synth->parsed()) return cmd_synth(synth);
    if (c_seg->parsed()) return cmd_segment(seg);
    if (c_order->parsed()) return cmd_order(order_labels, order_out);
    if (c_eval->parsed()) {
      if (!ev.batch && (ev.pred.empty() || ev.gt.empty())) {
        throw CliError{kUsage, "usage", "evaluate requires --pred and --gt (or --batch)"};
      }
      return cmd_evaluate(ev);
    }
    if (c_report->parsed()) return cmd_report(report_input, report_out);
    throw CliError{kUsage, "usage", "no subcommand"};
  } catch (const CliError& e) {
    emit_error(e);
    return e.code;
  } catch (const ft::nrrd_error& e) {
    emit_error({kMalformedVolume, "malformed_volume", e.what()});
    return kMalformedVolume;
  } catch (const ft::pipeline_error& e) {
    emit_error({kNothingDetected, "no_chambers", e.what()});
    return kNothingDetected;
  } catch (const ft::synth_error& e) {
    emit_error({kIncompatibleInput, "infeasible_spec", e.what()});
    return kIncompatibleInput;
  } catch (const ft::grid_error& e) {
    emit_error({kIncompatibleInput, "incompatible_input", e.what()});
    return kIncompatibleInput;
  } catch (const std::exception& e) {
    emit_error({kInternal, "internal", e.what()});
    return kInternal;
  }
}
