#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "foramtrace/metrics.hpp"
#include "foramtrace/pipelines.hpp"
#include "foramtrace/synth.hpp"
#include "oracles.hpp"

namespace ft = foramtrace;

namespace {

double dist3(double x, double y, double z, double cx, double cy, double cz) {
  return std::sqrt((x - cx) * (x - cx) + (y - cy) * (y - cy) + (z - cz) * (z - cz));
}

// cavity mask -> (boundary map with walls of the given strength around the
// cavity; divider voxels, lying between both cavity lobes, can be weakened)
ft::FloatGrid shell_around(const ft::MaskGrid& cavity, float wall_value,
                           float divider_value, std::int64_t divider_x_lo,
                           std::int64_t divider_x_hi) {
  const ft::Dims& d = cavity.dims();
  ft::FloatGrid bnd(d);
  for (std::int64_t z = 0; z < d.nz; ++z) {
    for (std::int64_t y = 0; y < d.ny; ++y) {
      for (std::int64_t x = 0; x < d.nx; ++x) {
        if (cavity.at(x, y, z) != 0) continue;
        bool near = false;
        for (std::int64_t dz = -2; dz <= 2 && !near; ++dz)
          for (std::int64_t dy = -2; dy <= 2 && !near; ++dy)
            for (std::int64_t dx = -2; dx <= 2 && !near; ++dx) {
              const std::int64_t px = x + dx, py = y + dy, pz = z + dz;
              if (dx * dx + dy * dy + dz * dz <= 4 && d.contains(px, py, pz) &&
                  cavity.at(px, py, pz) != 0) {
                near = true;
              }
            }
        if (near) {
          const bool divider = x >= divider_x_lo && x <= divider_x_hi;
          bnd.at(x, y, z) = divider ? divider_value : wall_value;
        }
      }
    }
  }
  return bnd;
}

ft::MaskGrid two_balls(const ft::Dims& d, double r, double cx1, double cx2, double cy,
                       double cz, double throat_radius) {
  ft::MaskGrid cavity(d);
  for (std::int64_t z = 0; z < d.nz; ++z) {
    for (std::int64_t y = 0; y < d.ny; ++y) {
      for (std::int64_t x = 0; x < d.nx; ++x) {
        const bool in1 = dist3(x, y, z, cx1, cy, cz) <= r;
        const bool in2 = dist3(x, y, z, cx2, cy, cz) <= r;
        bool in_throat = false;
        if (throat_radius > 0 && x >= cx1 && x <= cx2) {
          const double ry = double(y) - cy, rz = double(z) - cz;
          in_throat = std::sqrt(ry * ry + rz * rz) <= throat_radius;
        }
        cavity.at(x, y, z) = (in1 || in2 || in_throat) ? 1 : 0;
      }
    }
  }
  return cavity;
}

}  // namespace

TEST_CASE("interior pipeline separates two clean spheres", "[pipelines]") {
  ft::SynthSpec spec;
  spec.dims = {64, 40, 32};
  spec.chamber_count = 2;
  const auto fx = ft::generate(spec);
  const auto labels = ft::run_interior_sw(fx.maps.interior, {});
  REQUIRE(ft::max_label(labels) == 2);
  REQUIRE(ft::adjusted_rand_index(labels, fx.gt_labels) == Catch::Approx(1.0));
}

TEST_CASE("interior pipeline reports an empty volume", "[pipelines]") {
  const ft::FloatGrid zeros({8, 8, 8});
  REQUIRE_THROWS_AS(ft::run_interior_sw(zeros, {}), ft::pipeline_error);
}

TEST_CASE("erosion splits a thin neck into two chambers", "[pipelines]") {
  // two r=5 balls whose surfaces overlap in a neck of half-width ~1.6
  const ft::Dims d{26, 13, 13};
  ft::FloatGrid prob(d);
  for (std::int64_t z = 0; z < d.nz; ++z)
    for (std::int64_t y = 0; y < d.ny; ++y)
      for (std::int64_t x = 0; x < d.nx; ++x)
        if (dist3(x, y, z, 8, 6, 6) <= 5.0 || dist3(x, y, z, 17.5, 6, 6) <= 5.0)
          prob.at(x, y, z) = 1.0f;
  ft::PipelineConfig cfg;
  cfg.min_voxels = 20;
  const auto labels = ft::run_interior_sw(prob, cfg);  // default 2 erosion passes
  REQUIRE(ft::max_label(labels) == 2);
  // the neck belongs to the growth region, so the output covers the full mask
  for (std::size_t i = 0; i < prob.size(); ++i) {
    REQUIRE(int(labels[i] != 0) == int(prob[i] >= 0.5f));
  }
}

TEST_CASE("boundary pipeline keeps a strong wall and splits cavities", "[pipelines]") {
  const ft::Dims d{28, 14, 14};
  const auto cavity = two_balls(d, 3.2, 8, 17, 7, 7, 0);
  const auto bnd = shell_around(cavity, 0.9f, 0.9f, 12, 13);
  ft::PipelineConfig cfg;
  cfg.min_voxels = 20;
  const auto labels = ft::run_boundary_gasp(bnd, cfg);
  REQUIRE(ft::max_label(labels) == 2);
}

TEST_CASE("boundary pipeline with a vanished divider yields one chamber", "[pipelines]") {
  const ft::Dims d{28, 14, 14};
  const auto cavity = two_balls(d, 3.2, 8, 17, 7, 7, 0);
  const auto bnd = shell_around(cavity, 0.9f, 0.1f, 11, 14);  // divider below tau
  ft::PipelineConfig cfg;
  cfg.min_voxels = 20;
  const auto labels = ft::run_boundary_gasp(bnd, cfg);
  REQUIRE(ft::max_label(labels) == 1);
}

TEST_CASE("gasp heals an over-segmented dumbbell cavity", "[pipelines]") {
  // one cavity with a narrow throat: the pinch splits the seeds, the RAG edge
  // across the throat carries near-zero boundary probability, GASP remerges
  const ft::Dims d{30, 14, 14};
  const auto cavity = two_balls(d, 3.2, 8, 19, 7, 7, 1.4);
  const auto bnd = shell_around(cavity, 0.9f, 0.9f, 0, 0);
  ft::PipelineConfig cfg;
  cfg.min_voxels = 20;
  std::vector<ft::MergeStep> trace;
  const auto labels = ft::run_boundary_gasp(bnd, cfg, &trace);
  REQUIRE(ft::max_label(labels) == 1);
  REQUIRE(!trace.empty());
  REQUIRE(trace[0].affinity >= cfg.gasp.merge_affinity_threshold);
}

TEST_CASE("boundary pipeline errors without interior components", "[pipelines]") {
  const ft::FloatGrid zeros({8, 8, 8});
  REQUIRE_THROWS_AS(ft::run_boundary_gasp(zeros, {}), ft::pipeline_error);
}

TEST_CASE("mtl threshold logic on seed and region blocks", "[pipelines]") {
  // block A carries (0.6, 0.3, 0.2): a seed; block B carries (0.6, 0.5, 0.2):
  // excluded from seeding by the boundary threshold but inside the region
  const ft::Dims d{12, 6, 6};
  ft::ProbabilityTriplet maps{ft::FloatGrid(d), ft::FloatGrid(d), ft::FloatGrid(d)};
  for (std::size_t i = 0; i < d.voxel_count(); ++i) maps.background[i] = 1.0f;
  auto put = [&](std::int64_t x0, std::int64_t x1, float pi, float pb, float pg) {
    for (std::int64_t z = 2; z <= 4; ++z)
      for (std::int64_t y = 2; y <= 4; ++y)
        for (std::int64_t x = x0; x <= x1; ++x) {
          maps.interior.at(x, y, z) = pi;
          maps.boundary.at(x, y, z) = pb;
          maps.background.at(x, y, z) = pg;
        }
  };
  put(1, 3, 0.6f, 0.3f, 0.2f);
  put(4, 6, 0.6f, 0.5f, 0.2f);
  ft::PipelineConfig cfg;
  cfg.min_voxels = 10;
  const auto labels = ft::run_mtl_sw(maps, cfg);
  REQUIRE(ft::max_label(labels) == 1);
  REQUIRE(labels.at(2, 3, 3) == 1);  // seed block labeled
  REQUIRE(labels.at(5, 3, 3) == 1);  // region-only block flooded from the seed
  REQUIRE(labels.at(8, 3, 3) == 0);  // confident background untouched

  // dropping block A leaves no seeds at all
  put(1, 3, 0.6f, 0.5f, 0.2f);
  REQUIRE_THROWS_AS(ft::run_mtl_sw(maps, cfg), ft::pipeline_error);
}

TEST_CASE("mtl pipeline recovers three synthetic chambers exactly", "[pipelines]") {
  ft::SynthSpec spec;
  spec.dims = {72, 48, 32};
  spec.chamber_count = 3;
  const auto fx = ft::generate(spec);
  const auto labels = ft::run_mtl_sw(fx.maps, {});
  REQUIRE(ft::max_label(labels) == 3);
  REQUIRE(ft::adjusted_rand_index(labels, fx.gt_labels) == Catch::Approx(1.0));
}

TEST_CASE("pipeline outputs stay inside their growth regions and are compact",
          "[pipelines]") {
  ft::SynthSpec spec;
  spec.dims = {72, 48, 32};
  spec.chamber_count = 3;
  spec.noise_sigma = 0.08;
  spec.blur_radius = 1;
  spec.rng_seed = 9;
  const auto fx = ft::generate(spec);
  ft::PipelineConfig cfg;
  cfg.erosion.iterations = 1;
  cfg.min_voxels = 15;

  const auto a = ft::run_interior_sw(fx.maps.interior, cfg);
  const auto mask = ft::threshold(fx.maps.interior, cfg.tau_interior);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != 0) REQUIRE(mask[i] != 0);
  }
  REQUIRE(a == ft::compact_labels(a));

  const auto c = ft::run_mtl_sw(fx.maps, cfg);
  const auto region = ft::threshold(fx.maps.background, cfg.tau3);
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] != 0) REQUIRE(region[i] == 0);
  }
  REQUIRE(c == ft::compact_labels(c));

  // determinism end to end
  REQUIRE(ft::run_interior_sw(fx.maps.interior, cfg) == a);
  REQUIRE(ft::run_boundary_gasp(fx.maps.boundary, cfg) ==
          ft::run_boundary_gasp(fx.maps.boundary, cfg));
  REQUIRE(ft::run_mtl_sw(fx.maps, cfg) == c);
}
