#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "qnet/cli.hpp"
#include "support.hpp"

using namespace qnet;
using namespace qnet::cli;
using testing_support::config_path;

namespace {

LoadResult load(const std::string& name, const std::vector<std::string>& overrides = {}) {
  return interpret(load_config_json(config_path(name), overrides));
}

const OutputFile& file(const std::vector<OutputFile>& files, const std::string& name) {
  for (const auto& f : files) {
    if (f.name == name) return f;
  }
  throw std::runtime_error("missing output " + name);
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("qnet_cli_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST(Overrides, DottedPathsAndArrayIndices) {
  json j = json::parse(R"({"a": {"b": [1, {"c": 2}]}, "s": "x"})");
  apply_override(j, "a.b.1.c=5");
  apply_override(j, "a.new=true");
  apply_override(j, "s=plain text");
  apply_override(j, "a.b.0=[1,2]");
  EXPECT_EQ(j["a"]["b"][1]["c"], 5);
  EXPECT_EQ(j["a"]["new"], true);
  EXPECT_EQ(j["s"], "plain text");
  EXPECT_EQ(j["a"]["b"][0], json::parse("[1,2]"));
  EXPECT_THROW(apply_override(j, "novalue"), Error);
  EXPECT_THROW(apply_override(j, "=3"), Error);
}

TEST(Validation, BundledConfigsAreClean) {
  for (const auto& name : testing_support::bundled_configs()) {
    const LoadResult r = load(name);
    for (const auto& d : r.diagnostics) ADD_FAILURE() << name << ": " << d.str();
    EXPECT_TRUE(r.config.has_value()) << name;
  }
}

TEST(Validation, UnknownRouteNodeIsOneDiagnostic) {
  const LoadResult r = load("fig8_noon", {R"(routes.e=["UTC","XQN","UTC"])"});
  ASSERT_EQ(r.diagnostics.size(), 1u);
  EXPECT_EQ(r.diagnostics[0].path.rfind("routes.e", 0), 0u) << r.diagnostics[0].str();
  EXPECT_NE(r.diagnostics[0].message.find("XQN"), std::string::npos);
  EXPECT_FALSE(r.config.has_value());
}

TEST(Validation, NegativeLinkLossNamesTheLink) {
  const LoadResult r = load("fig8_noon", {"topology.links.0.loss_db=-1"});
  ASSERT_EQ(r.diagnostics.size(), 1u);
  EXPECT_NE(r.diagnostics[0].str().find("UTC-TQN"), std::string::npos) << r.diagnostics[0].str();
}

TEST(Validation, CollectsSeveralProblems) {
  const LoadResult r = load("fig4d_bell_fringe", {"bogus=1", "source.pair_rate_hz=-5", "detectors.0.efficiency=2"});
  EXPECT_EQ(r.diagnostics.size(), 3u);
  const LoadResult m = load("fig4d_bell_fringe", {"mode=\"fly\""});
  ASSERT_EQ(m.diagnostics.size(), 1u);
  EXPECT_EQ(m.diagnostics[0].path, "mode");
}

TEST(Manifest, RerunIsByteIdentical) {
  const LoadResult r = load("fig6c_local_fusion", {"duration_s=0.05", "scan.range.step=2"});
  ASSERT_TRUE(r.config) << (r.diagnostics.empty() ? "" : r.diagnostics[0].str());
  const auto first = execute(*r.config, Format::kCsv, 1);
  const auto dir = scratch("manifest");
  write_outputs(dir, first);

  const LoadResult again = interpret(load_config_json(dir / "manifest.json", {}));
  ASSERT_TRUE(again.config);
  const auto second = execute(*again.config, Format::kCsv, 2);
  ASSERT_EQ(first.size(), second.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    EXPECT_EQ(first[i].name, second[i].name);
    EXPECT_EQ(first[i].content, second[i].content) << first[i].name;
  }
  const json manifest = json::parse(file(first, "manifest.json").content);
  EXPECT_EQ(manifest["tool"], "qnetsim");
  EXPECT_EQ(manifest["config_hash"], config_hash(manifest["config"]));
  EXPECT_FALSE(manifest["config"].contains("workers"));
}

TEST(Manifest, HashTracksEffectiveConfig) {
  const LoadResult a = load("fig4d_bell_fringe");
  const LoadResult b = load("fig4d_bell_fringe", {"seed=9"});
  const LoadResult c = load("fig4d_bell_fringe", {"workers=3"});
  ASSERT_TRUE(a.config && b.config && c.config);
  EXPECT_NE(config_hash(a.config->effective), config_hash(b.config->effective));
  EXPECT_EQ(config_hash(a.config->effective), config_hash(c.config->effective));
}

TEST(Predict, BellFringeTableMatchesClosedForm) {
  const LoadResult r = load("fig4d_bell_fringe");
  ASSERT_TRUE(r.config);
  const auto rows = csv_rows(file(execute(*r.config, Format::kCsv, 1), "predict.csv").content);
  ASSERT_EQ(rows[0], (std::vector<std::string>{"scan_value", "quantity", "value"}));
  std::size_t checked = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double phi = std::stod(rows[i][0]);
    const double v = std::stod(rows[i][2]);
    const double c = std::cos(phi);
    if (rows[i][1] == "HH.ideal" || rows[i][1] == "VV.ideal") {
      EXPECT_NEAR(v, 0.25 * (1 - c), 1e-12);
      ++checked;
    } else if (rows[i][1] == "HV.ideal" || rows[i][1] == "VH.ideal") {
      EXPECT_NEAR(v, 0.25 * (1 + c), 1e-12);
      ++checked;
    }
  }
  EXPECT_EQ(checked, 25u * 4u);
}

TEST(Throughput, LocalRateAndBudget) {
  const LoadResult r = load("throughput");
  ASSERT_TRUE(r.config);
  const auto rows = csv_rows(file(execute(*r.config, Format::kCsv, 1), "throughput.csv").content);
  std::map<std::string, double> q;
  for (std::size_t i = 1; i < rows.size(); ++i) q[rows[i][0]] = std::stod(rows[i][1]);
  EXPECT_DOUBLE_EQ(q.at("local_fourfold_rate_hz"), 93.75);
  EXPECT_DOUBLE_EQ(q.at("naive.total_loss_db"), 23.0);
  EXPECT_NEAR(q.at("naive.rate_hz"), 93.75 * std::pow(10.0, -2.3), 1e-12);
  EXPECT_DOUBLE_EQ(q.at("target_rate_hz"), 0.07);
  EXPECT_DOUBLE_EQ(q.at("noon.photon_e.path_loss_db"), 5.0);
  EXPECT_DOUBLE_EQ(q.at("bell.photon_f.path_loss_db"), 10.0);
}

TEST(Output, JsonFormatMirrorsCsv) {
  const LoadResult r = load("throughput");
  ASSERT_TRUE(r.config);
  const auto files = execute(*r.config, Format::kJson, 1);
  const json arr = json::parse(file(files, "throughput.json").content);
  ASSERT_TRUE(arr.is_array());
  EXPECT_EQ(arr[0]["quantity"], "local_fourfold_rate_hz");
  EXPECT_DOUBLE_EQ(arr[0]["value"].get<double>(), 93.75);
}

TEST(Simulate, UnscannedRunWritesTimetags) {
  json cfg = load_config_json(config_path("fig8_noon"), {"duration_s=0.02"});
  cfg.erase("scan");
  const LoadResult r = interpret(cfg);
  ASSERT_TRUE(r.config) << (r.diagnostics.empty() ? "" : r.diagnostics[0].str());
  const auto files = execute(*r.config, Format::kCsv, 1);
  std::stringstream tags(file(files, "timetags.csv").content);
  const TagStreams s = read_timetags_csv(tags);
  EXPECT_FALSE(s.empty());
  const auto rows = csv_rows(file(files, "scan.csv").content);
  ASSERT_GE(rows.size(), 2u);
  EXPECT_EQ(rows[1][0], "none");
}
