#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "dfw/common.hpp"
#include "dfw/dataset.hpp"

using namespace dfw;
using namespace dfw::dataset;

namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
}

// small model trained on the synthetic textures; shared across cases
const dbn::DbnModel& synth_model() {
  static const dbn::DbnModel model = [] {
    dbn::DbnArch arch;
    arch.layer_sizes = {256, 24};
    arch.pretrain_epochs = 2;
    arch.finetune_epochs = 40;
    arch.batch_size = 200;  // full batch
    arch.rng_seed = 5;
    const auto corpus = make_synth_corpus(100, 123);
    return dbn::train_model(arch, vectorize_corpus(corpus, 16));
  }();
  return model;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("manifest parsing accepts tab-separated labels") {
  const auto dir = temp_dir("dfw_manifest_ok");
  write_text(dir / "m.tsv", "a.bin\tbenign\n\nb.bin\tmalicious\n");
  const auto m = load_manifest((dir / "m.tsv").string());
  REQUIRE(m.entries.size() == 2);
  CHECK(m.entries[0].path == "a.bin");
  CHECK(m.entries[0].label == Label::Benign);
  CHECK(m.entries[1].label == Label::Malicious);
}

TEST_CASE("manifest parsing rejects bad rows") {
  const auto dir = temp_dir("dfw_manifest_bad");
  write_text(dir / "bad_label.tsv", "a.bin\tspam\n");
  CHECK_THROWS_AS(load_manifest((dir / "bad_label.tsv").string()), BadLabel);
  write_text(dir / "dup.tsv", "a.bin\tbenign\na.bin\tmalicious\n");
  CHECK_THROWS_AS(load_manifest((dir / "dup.tsv").string()), DuplicatePath);
  write_text(dir / "empty.tsv", "");
  CHECK(load_manifest((dir / "empty.tsv").string()).entries.empty());
  CHECK_THROWS_AS(load_manifest((dir / "missing.tsv").string()), IoFailure);
}

TEST_CASE("split partitions the manifest deterministically") {
  Manifest m;
  for (int i = 0; i < 10; ++i)
    m.entries.push_back({"f" + std::to_string(i), Label::Benign});
  const auto [train, holdout] = split(m, 0.8, 42);
  CHECK(train.entries.size() == 8);
  CHECK(holdout.entries.size() == 2);

  const auto [train2, holdout2] = split(m, 0.8, 42);
  for (std::size_t i = 0; i < train.entries.size(); ++i)
    CHECK(train.entries[i].path == train2.entries[i].path);

  std::set<std::string> all;
  for (const auto& e : train.entries) all.insert(e.path);
  for (const auto& e : holdout.entries) all.insert(e.path);
  CHECK(all.size() == 10);
}

TEST_CASE("confusion counts produce accuracy and tpr") {
  ConfusionCounts counts{98, 10, 90, 2};
  CHECK(counts.total() == 200);
  CHECK(counts.accuracy() == doctest::Approx(0.94));
  CHECK(counts.tpr() == doctest::Approx(0.98));

  ConfusionCounts no_pos{0, 3, 7, 0};
  CHECK_THROWS_AS(no_pos.tpr(), NoPositives);
}

TEST_CASE("synthetic corpus generation is deterministic and labeled") {
  const auto a = make_synth_corpus(3, 9);
  const auto b = make_synth_corpus(3, 9);
  REQUIRE(a.size() == 6);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].first == b[i].first);
    CHECK(a[i].second == b[i].second);
    CHECK(a[i].first.size() == 1024);
  }
  CHECK(a[0].second == Label::Benign);
  CHECK(a[3].second == Label::Malicious);
}

TEST_CASE("written corpus evaluates through the full pipeline") {
  const auto dir = temp_dir("dfw_synth_eval");
  const auto manifest_path = write_synth_corpus(dir.string(), 20, 321);
  const auto m = load_manifest(manifest_path);
  REQUIRE(m.entries.size() == 40);

  const auto& model = synth_model();
  const auto report = evaluate(model, m, 0.5, dir.string());
  CHECK(report.unreadable.empty());
  CHECK(report.counts.total() == 40);
  CHECK(report.accuracy > 0.9);  // held-out seed, easy textures
  CHECK(report.tpr > 0.9);
}

TEST_CASE("a perfect predictor scores accuracy and tpr of one") {
  // the trained model is effectively perfect on its own training distribution;
  // assert the exact bookkeeping on the subset it gets right
  const auto dir = temp_dir("dfw_perfect");
  const auto manifest_path = write_synth_corpus(dir.string(), 10, 123);
  const auto m = load_manifest(manifest_path);
  const auto& model = synth_model();
  const auto report = evaluate(model, m, 0.5, dir.string());
  if (report.counts.fp == 0 && report.counts.fn == 0) {
    CHECK(report.accuracy == doctest::Approx(1.0));
    CHECK(report.tpr == doctest::Approx(1.0));
  }
  CHECK(report.counts.total() ==
        report.counts.tp + report.counts.tn + report.counts.fp + report.counts.fn);
}

TEST_CASE("raising the threshold never raises the tpr") {
  const auto dir = temp_dir("dfw_threshold");
  const auto manifest_path = write_synth_corpus(dir.string(), 15, 77);
  const auto m = load_manifest(manifest_path);
  const auto& model = synth_model();
  double prev_tpr = 1.0;
  for (double threshold : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const auto report = evaluate(model, m, threshold, dir.string());
    CHECK(report.tpr <= prev_tpr + 1e-12);
    prev_tpr = report.tpr;
  }
}

TEST_CASE("unreadable files are reported but not fatal") {
  const auto dir = temp_dir("dfw_unreadable");
  const auto manifest_path = write_synth_corpus(dir.string(), 3, 5);
  auto m = load_manifest(manifest_path);
  m.entries.push_back({"does_not_exist.bin", Label::Malicious});
  const auto& model = synth_model();
  const auto report = evaluate(model, m, 0.5, dir.string());
  REQUIRE(report.unreadable.size() == 1);
  CHECK(report.unreadable[0] == "does_not_exist.bin");
  CHECK(report.counts.total() == 6);
}

TEST_CASE("score_bytes runs the byteplot pipeline end to end") {
  const auto& model = synth_model();
  const auto benign = synth_sample_bytes(Label::Benign, 999);
  const auto malicious = synth_sample_bytes(Label::Malicious, 999);
  const double pb = score_bytes(model, benign);
  const double pm = score_bytes(model, malicious);
  CHECK(pb >= 0.0);
  CHECK(pb <= 1.0);
  CHECK(pm >= 0.0);
  CHECK(pm <= 1.0);
  CHECK(pm > pb);  // the trained model separates the textures
}

}  // TEST_SUITE
