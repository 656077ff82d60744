#include "dfw/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "dfw/imgcodec.hpp"

namespace dfw::dataset {

namespace fs = std::filesystem;

Label parse_label(const std::string& s) {
  if (s == "benign") return Label::Benign;
  if (s == "malicious") return Label::Malicious;
  throw BadLabel("unknown label '" + s + "'");
}

std::string label_name(Label l) {
  return l == Label::Benign ? "benign" : "malicious";
}

Manifest load_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoFailure("load_manifest: cannot open " + path);
  Manifest m;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw BadLabel("manifest line " + std::to_string(line_no) +
                     ": expected <path>\\t<label>");
    const std::string p = line.substr(0, tab);
    const std::string label_str = line.substr(tab + 1);
    Label label;
    try {
      label = parse_label(label_str);
    } catch (const BadLabel&) {
      throw BadLabel("manifest line " + std::to_string(line_no) +
                     ": unknown label '" + label_str + "'");
    }
    if (!seen.insert(p).second)
      throw DuplicatePath("manifest line " + std::to_string(line_no) +
                          ": duplicate path '" + p + "'");
    m.entries.push_back({p, label});
  }
  return m;
}

void save_manifest(const Manifest& m, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoFailure("save_manifest: cannot open " + path);
  for (const auto& e : m.entries) f << e.path << '\t' << label_name(e.label) << '\n';
  if (!f) throw IoFailure("save_manifest: write failed for " + path);
}

std::pair<Manifest, Manifest> split(const Manifest& m, double train_fraction,
                                    std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw Error("split: train_fraction must be in (0, 1)");
  std::vector<std::size_t> idx(m.entries.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(seed);
  for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
  const auto n_train = static_cast<std::size_t>(
      std::lround(train_fraction * static_cast<double>(m.entries.size())));
  Manifest train, holdout;
  for (std::size_t i = 0; i < idx.size(); ++i)
    (i < n_train ? train : holdout).entries.push_back(m.entries[idx[i]]);
  return {train, holdout};
}

ByteVec read_file_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoFailure("cannot open " + path);
  return ByteVec((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

double score_bytes(const dbn::DbnModel& model, std::span<const std::uint8_t> bytes) {
  const int side = model.input_side();
  const auto img = imgcodec::bytes_to_image(bytes);
  const auto small = imgcodec::downscale(img, side, side);
  return dbn::predict_malicious(model, imgcodec::to_input_vector(small, side, side));
}

EvalReport evaluate(const dbn::DbnModel& model, const Manifest& m,
                    double threshold, const std::string& base_dir) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw Error("evaluate: threshold must be in (0, 1)");
  EvalReport report;
  for (const auto& e : m.entries) {
    fs::path p(e.path);
    if (p.is_relative() && !base_dir.empty()) p = fs::path(base_dir) / p;
    ByteVec bytes;
    try {
      bytes = read_file_bytes(p.string());
      if (bytes.empty()) throw IoFailure("empty file " + p.string());
    } catch (const IoFailure&) {
      report.unreadable.push_back(e.path);
      continue;
    }
    const double prob = score_bytes(model, bytes);
    const bool predicted_malicious = prob >= threshold;
    const bool is_malicious = e.label == Label::Malicious;
    if (is_malicious)
      (predicted_malicious ? report.counts.tp : report.counts.fn)++;
    else
      (predicted_malicious ? report.counts.fp : report.counts.tn)++;
  }
  report.accuracy = report.counts.accuracy();
  report.tpr = report.counts.tpr();  // throws NoPositives when undefined
  return report;
}

// --- synthetic corpus ------------------------------------------------------

namespace {
constexpr int kSynthSide = 32;   // 1024 bytes -> 32-wide byteplot
constexpr int kBandPeriod = 8;   // rows/cols per repeat
}  // namespace

ByteVec synth_sample_bytes(Label label, std::uint64_t seed) {
  Rng rng(seed);
  const int phase = static_cast<int>(rng.below(kBandPeriod));
  // benign: sparse bright horizontal bands on dark ground;
  // malicious: dense bright vertical bands
  const bool vertical = label == Label::Malicious;
  const int bright_span = vertical ? 6 : 2;
  ByteVec bytes(static_cast<std::size_t>(kSynthSide) * kSynthSide);
  for (int y = 0; y < kSynthSide; ++y) {
    for (int x = 0; x < kSynthSide; ++x) {
      const int t = vertical ? x : y;
      const bool bright = (t + phase) % kBandPeriod < bright_span;
      const int base = bright ? 190 : 60;
      const int noise = static_cast<int>(rng.below(51)) - 25;
      bytes[static_cast<std::size_t>(y) * kSynthSide + x] =
          static_cast<std::uint8_t>(std::clamp(base + noise, 0, 255));
    }
  }
  return bytes;
}

std::vector<std::pair<ByteVec, Label>> make_synth_corpus(int per_class,
                                                         std::uint64_t seed) {
  std::vector<std::pair<ByteVec, Label>> corpus;
  corpus.reserve(2 * static_cast<std::size_t>(per_class));
  for (Label label : {Label::Benign, Label::Malicious}) {
    const std::uint64_t class_seed = mix_seed(seed, static_cast<int>(label));
    for (int i = 0; i < per_class; ++i)
      corpus.emplace_back(synth_sample_bytes(label, mix_seed(class_seed, i)), label);
  }
  return corpus;
}

std::string write_synth_corpus(const std::string& out_dir, int per_class,
                               std::uint64_t seed) {
  if (per_class < 1) throw Error("write_synth_corpus: per_class must be >= 1");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoFailure("write_synth_corpus: cannot create " + out_dir);

  Manifest m;
  const auto corpus = make_synth_corpus(per_class, seed);
  std::vector<int> counter(2, 0);
  for (const auto& [bytes, label] : corpus) {
    char name[64];
    std::snprintf(name, sizeof(name), "%s_%04d.bin", label_name(label).c_str(),
                  counter[static_cast<int>(label)]++);
    const fs::path p = fs::path(out_dir) / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw IoFailure("write_synth_corpus: cannot open " + p.string());
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    m.entries.push_back({name, label});
  }
  const std::string manifest_path = (fs::path(out_dir) / "manifest.tsv").string();
  save_manifest(m, manifest_path);
  return manifest_path;
}

std::vector<dbn::LabeledVector> vectorize_corpus(
    const std::vector<std::pair<ByteVec, Label>>& corpus, int side) {
  std::vector<dbn::LabeledVector> out;
  out.reserve(corpus.size());
  for (const auto& [bytes, label] : corpus) {
    const auto img = imgcodec::downscale(imgcodec::bytes_to_image(bytes), side, side);
    out.emplace_back(imgcodec::to_input_vector(img, side, side),
                     static_cast<int>(label));
  }
  return out;
}

std::vector<dbn::LabeledVector> load_vectors(const Manifest& m, int side,
                                             const std::string& base_dir) {
  std::vector<dbn::LabeledVector> out;
  out.reserve(m.entries.size());
  for (const auto& e : m.entries) {
    fs::path p(e.path);
    if (p.is_relative() && !base_dir.empty()) p = fs::path(base_dir) / p;
    const ByteVec bytes = read_file_bytes(p.string());
    if (bytes.empty()) throw IoFailure("empty file " + p.string());
    const auto img = imgcodec::downscale(imgcodec::bytes_to_image(bytes), side, side);
    out.emplace_back(imgcodec::to_input_vector(img, side, side),
                     static_cast<int>(e.label));
  }
  return out;
}

}  // namespace dfw::dataset
