#include <gtest/gtest.h>

#include <json.hpp>

#include "phasemap/error.hpp"
#include "phasemap/pipeline.hpp"
#include "support/tempdir.hpp"

using namespace phasemap;
using testing_support::slurp;
using testing_support::TempDir;

namespace {

RunConfig small_run() {
  RunConfig c;
  c.model = "annni";
  c.axes = parse_grid("k=0:1:3,h=0.2:1.8:4");
  c.n_sites = 8;
  c.dmrg.chi = 8;
  c.c_max = 5;
  return c;
}

}  // namespace

TEST(RunConfig, TextRoundTripKeepsDigest) {
  RunConfig c = small_run();
  c.tau = 0.35;
  c.fixed_c = 3;
  c.metric = SilhouetteMetric::embedding;
  c.dmrg.noise = 0.0;
  c.dmrg.project_symmetric = false;
  const RunConfig back = run_config_from_text(to_text(c));
  EXPECT_EQ(config_digest(back), config_digest(c));
  EXPECT_EQ(back.fixed_c, std::optional<std::size_t>(3));
  EXPECT_EQ(back.metric, SilhouetteMetric::embedding);
  EXPECT_FALSE(back.dmrg.project_symmetric);
  EXPECT_EQ(format_grid(back.axes), format_grid(c.axes));
}

TEST(RunConfig, DigestTracksResultFieldsOnly) {
  const RunConfig base = small_run();
  RunConfig other = base;
  other.jobs = 4;
  other.verbose = true;
  other.output_dir = "/somewhere";
  other.cache_dir = "/elsewhere";
  EXPECT_EQ(config_digest(other), config_digest(base));
  for (auto mutate : std::vector<void (*)(RunConfig&)>{
           [](RunConfig& c) { c.tau = 0.6; }, [](RunConfig& c) { c.n_sites = 9; },
           [](RunConfig& c) { c.dmrg.chi = 9; }, [](RunConfig& c) { c.seed = 1; },
           [](RunConfig& c) { c.fixed_c = 2; }, [](RunConfig& c) { c.axes[0].count = 4; },
           [](RunConfig& c) { c.dmrg.noise = 0.2; }}) {
    RunConfig changed = base;
    mutate(changed);
    EXPECT_NE(config_digest(changed), config_digest(base));
  }
}

TEST(RunConfig, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(run_config_from_text(R"({"tua": 0.5})"), ValidationError);
  EXPECT_THROW(run_config_from_text(R"({"dmrg": {"chii": 4}})"), ValidationError);
  EXPECT_THROW(run_config_from_text(R"({"metric": "cosine"})"), ValidationError);
  EXPECT_THROW(run_config_from_text("[1]"), ValidationError);
  EXPECT_THROW(run_config_from_text("{"), ValidationError);
  RunConfig c = small_run();
  c.tau = 1.0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = small_run();
  c.c_min = 1;
  EXPECT_THROW(c.validate(), ValidationError);
  c = small_run();
  c.axes = parse_grid("x=0:1:2,h=0:1:2");
  EXPECT_THROW(resolve_grid(c), ValidationError);
}

TEST(RunConfig, Resolution) {
  RunConfig c;
  EXPECT_EQ(resolve_grid(c).size(), 225u);
  c.sample_count = 17;
  EXPECT_EQ(resolve_grid(c).size(), 17u);
  EXPECT_NE(point_dmrg_config(c, 0).seed, point_dmrg_config(c, 1).seed);
  EXPECT_EQ(point_dmrg_config(c, 3).seed, point_dmrg_config(c, 3).seed);
  c.cache_dir = "/tmp/x";
  EXPECT_EQ(resolve_cache_dir(c), std::filesystem::path("/tmp/x"));
}

TEST(Pipeline, SinglePointFixedC) {
  RunConfig c;
  c.axes = parse_grid("k=0.4:0.4:1,h=0.9:0.9:1");
  c.n_sites = 6;
  c.fixed_c = 1;
  const RunResult r = run_pipeline(c);
  ASSERT_EQ(r.diagram.points.size(), 1u);
  EXPECT_EQ(r.diagram.points[0].label, 0);
  EXPECT_EQ(r.diagram.points[0].silhouette, 0.0);
  EXPECT_EQ(r.kernel.entries(0, 0), 1.0);
  EXPECT_FALSE(r.diagram.selection.has_value());
}

TEST(Pipeline, ColdRunsReproduceAndWarmCacheMatches) {
  TempDir tmp;
  RunConfig c = small_run();
  c.output_dir = tmp.path() / "a";
  const RunResult cold = run_pipeline(c);
  c.output_dir = tmp.path() / "b";
  run_pipeline(c);
  EXPECT_EQ(slurp(tmp.path() / "a/labels.csv"), slurp(tmp.path() / "b/labels.csv"));
  EXPECT_EQ(slurp(tmp.path() / "a/kernel.csv"), slurp(tmp.path() / "b/kernel.csv"));

  c.cache_dir = tmp.path() / "cache";
  c.output_dir = tmp.path() / "c";
  c.jobs = 2;
  const RunResult filled = run_pipeline(c);
  for (const auto& p : filled.points) EXPECT_FALSE(p.cached);
  EXPECT_EQ(list_cache(c.cache_dir).size(), 13u);  // 12 states + 1 kernel
  c.output_dir = tmp.path() / "d";
  const RunResult warm = run_pipeline(c);
  for (const auto& p : warm.points) EXPECT_TRUE(p.cached);
  EXPECT_EQ(slurp(tmp.path() / "a/labels.csv"), slurp(tmp.path() / "d/labels.csv"));
  EXPECT_EQ(cold.kernel.entries, warm.kernel.entries);
  EXPECT_EQ(evict_cache(c.cache_dir), 13u);
  EXPECT_TRUE(list_cache(c.cache_dir).empty());
}

TEST(Pipeline, CacheEntriesForOtherConfigsAreRecomputed) {
  TempDir tmp;
  RunConfig c = small_run();
  c.cache_dir = tmp.path();
  run_pipeline(c);
  c.dmrg.chi = 6;
  const RunResult r = run_pipeline(c);
  for (const auto& p : r.points) EXPECT_FALSE(p.cached);
}

TEST(Pipeline, EveryArtifactNamesTheConfig) {
  TempDir tmp;
  RunConfig c = small_run();
  c.output_dir = tmp.path();
  const RunResult r = run_pipeline(c);
  const std::string digest = config_digest(c);
  EXPECT_EQ(r.diagram.digest, digest);
  const auto manifest = nlohmann::json::parse(slurp(tmp.path() / "manifest.json"));
  EXPECT_EQ(manifest.at("config_digest"), digest);
  for (const auto& name : manifest.at("artifacts")) {
    const std::string file = name.get<std::string>();
    if (file == "kernel.csv") continue;  // plain matrix; its sidecar carries the digest
    EXPECT_NE(slurp(tmp.path() / file).find(digest), std::string::npos) << file;
  }
  for (const char* required : {"labels.csv", "kernel.csv", "kernel.json", "selection.json", "diagram.svg"})
    EXPECT_TRUE(std::filesystem::exists(tmp.path() / required)) << required;
  EXPECT_EQ(manifest.at("points").size(), 12u);
  EXPECT_EQ(manifest.at("chosen_c"), r.diagram.chosen_c);
}

TEST(Pipeline, UnconvergedPointsAreFlagged) {
  TempDir tmp;
  RunConfig c = small_run();
  c.dmrg.max_sweeps = 1;
  c.dmrg.noise_sweeps = 0;
  c.fixed_c = 2;
  c.output_dir = tmp.path();
  const RunResult r = run_pipeline(c);
  std::size_t flagged = 0;
  for (const auto& p : r.points) flagged += !p.converged;
  EXPECT_GT(flagged, 0u);
  const auto manifest = nlohmann::json::parse(slurp(tmp.path() / "manifest.json"));
  EXPECT_EQ(manifest.at("unconverged").size(), flagged);
}

TEST(Pipeline, LabelsCsvRoundTrip) {
  PhaseDiagram d;
  d.axis_names = {"k", "h"};
  d.points = {{{0.1, 0.2}, 0, 0.25}, {{0.3, 1.0 / 3.0}, 2, -0.125}};
  d.digest = "feedfacecafebeef";
  const std::string text = labels_csv(d);
  EXPECT_EQ(text.rfind("# config feedfacecafebeef\nindex,k,h,label,silhouette\n", 0), 0u);
  const PhaseDiagram back = read_labels_csv(text);
  EXPECT_EQ(back.axis_names, d.axis_names);
  EXPECT_EQ(back.digest, d.digest);
  ASSERT_EQ(back.points.size(), 2u);
  EXPECT_EQ(back.points[1].coords[1], 1.0 / 3.0);
  EXPECT_EQ(back.points[1].label, 2);
  EXPECT_EQ(back.points[1].silhouette, -0.125);
  EXPECT_EQ(labels_csv(back), text);
  EXPECT_THROW(read_labels_csv("index,k,label,silhouette\n0,1,x,0\n"), ValidationError);
  EXPECT_THROW(read_labels_csv(""), ValidationError);
}

TEST(Pipeline, DiagramFromKernelShapes) {
  RunConfig c = small_run();
  const ParameterGrid g = resolve_grid(c);
  Eigen::MatrixXd k = Eigen::MatrixXd::Constant(12, 12, 0.1);
  k.topLeftCorner(6, 6).setConstant(0.9);
  k.bottomRightCorner(6, 6).setConstant(0.9);
  k.diagonal().setOnes();
  const PhaseDiagram d = diagram_from_kernel(make_kernel(k), g, c);
  EXPECT_EQ(d.chosen_c, 2u);
  for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(d.points[i].label, i < 6 ? 0 : 1);
  c.fixed_c = 13;
  EXPECT_THROW(diagram_from_kernel(make_kernel(k), g, c), ValidationError);
  EXPECT_THROW(diagram_from_kernel(make_kernel(Eigen::MatrixXd::Identity(3, 3)), g, small_run()), ValidationError);
}
