#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dfw/common.hpp"
#include "dfw/dbn.hpp"

// Corpus handling and the accuracy/TPR harness. Malicious is the positive
// class throughout.

namespace dfw::dataset {

enum class Label : int { Benign = 0, Malicious = 1 };

Label parse_label(const std::string& s);  // throws BadLabel
std::string label_name(Label l);

struct Manifest {
  struct Entry {
    std::string path;
    Label label;
  };
  std::vector<Entry> entries;
};

// Tab-separated "<path>\t<label>" lines; blank lines skipped.
Manifest load_manifest(const std::string& path);
void save_manifest(const Manifest& m, const std::string& path);

// Seeded shuffle, then split into (train, holdout).
std::pair<Manifest, Manifest> split(const Manifest& m, double train_fraction,
                                    std::uint64_t seed);

struct ConfusionCounts {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  double accuracy() const {
    return total() == 0 ? 0.0 : static_cast<double>(tp + tn) / total();
  }
  double tpr() const {
    if (tp + fn == 0) throw NoPositives("tpr: no positive samples evaluated");
    return static_cast<double>(tp) / (tp + fn);
  }
};

struct EvalReport {
  ConfusionCounts counts;
  double accuracy = 0.0;
  double tpr = 0.0;
  std::vector<std::string> unreadable;  // reported, not fatal
};

// Full pipeline probability for one file's bytes: byteplot -> downscale to
// the model's input side -> normalize -> malicious probability.
double score_bytes(const dbn::DbnModel& model, std::span<const std::uint8_t> bytes);

// Runs score_bytes per manifest entry; predicts malicious iff probability >=
// threshold. Relative paths resolve against base_dir (use the manifest's
// directory for relocatable corpora).
EvalReport evaluate(const dbn::DbnModel& model, const Manifest& m,
                    double threshold, const std::string& base_dir = "");

ByteVec read_file_bytes(const std::string& path);

// --- synthetic two-texture corpus -----------------------------------------
// 1024-byte samples whose 32x32 byteplot carries horizontal (benign) or
// vertical (malicious) bands plus seeded noise; stands in for MALIMG so the
// pipeline is testable end to end.

ByteVec synth_sample_bytes(Label label, std::uint64_t seed);

std::vector<std::pair<ByteVec, Label>> make_synth_corpus(int per_class,
                                                         std::uint64_t seed);

// Writes per-class .bin files plus manifest.tsv (paths relative to out_dir);
// returns the manifest path.
std::string write_synth_corpus(const std::string& out_dir, int per_class,
                               std::uint64_t seed);

// Convenience: corpus bytes -> normalized vectors for a given input side.
std::vector<dbn::LabeledVector> vectorize_corpus(
    const std::vector<std::pair<ByteVec, Label>>& corpus, int side);

// Reads every manifest entry through the byteplot pipeline at the given input
// side. Unreadable files raise IoFailure (training needs the full corpus).
std::vector<dbn::LabeledVector> load_vectors(const Manifest& m, int side,
                                             const std::string& base_dir = "");

}  // namespace dfw::dataset
