#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "pinyin.hpp"
#include "prompting.hpp"

namespace polyg2p {

struct MajorityModel {
  std::map<char32_t, PinyinSyllable> table;
  PinyinSyllable fallback;
};

// Per-character argmax of gold counts, ties to the smaller pinyin text.
// Throws Error(EmptyDataset), or Error(InvalidArgument) for an unlabeled row.
MajorityModel train_majority(std::span<const Sample> train);
PinyinSyllable predict_majority(const MajorityModel& model, const Sample& sample);

struct Prediction {
  std::optional<PinyinSyllable> pinyin;  // empty when nothing usable came out
  bool generated = false;  // went through a generation backend
  bool valid_generation = true;  // generated text was already a candidate
};

// Must be safe to call concurrently when evaluate() runs with threads > 1.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual Prediction predict(const Sample& sample) const = 0;
  virtual std::string id() const = 0;
};

class MajorityPredictor final : public Predictor {
 public:
  explicit MajorityPredictor(MajorityModel model) : model_(std::move(model)) {}
  Prediction predict(const Sample& sample) const override { return {predict_majority(model_, sample)}; }
  std::string id() const override { return "majority"; }

 private:
  MajorityModel model_;
};

// Everything needed to rerun one report row.
struct RunInfo {
  std::string style = "n/a";
  std::string knowledge = "n/a";  // "on" | "off" | "n/a"
  double train_ratio = 1.0;
  std::uint64_t seed = 0;
  std::string backend;
  std::string split_source;
  std::size_t n_train = 0;
};

struct CharacterScore {
  std::size_t n = 0;
  std::size_t correct = 0;
};

struct EvalReport {
  std::string condition;
  RunInfo run;
  std::size_t n_samples = 0;
  std::size_t n_correct = 0;
  double accuracy = 0.0;
  double invalid_generation_rate = 0.0;
  std::map<char32_t, CharacterScore> per_character;
  double wall_clock_seconds = 0.0;  // excluded from comparisons
};

// Exact match of canonical pinyin against gold. A predictor throwing
// polyg2p::Error counts as a wrong, invalid generation, except
// BackendUnavailable which propagates. threads > 1 fans out over samples;
// the result does not depend on the thread count.
EvalReport evaluate(const Predictor& predictor, std::span<const Sample> samples, std::string condition,
                    RunInfo run = {}, unsigned threads = 1);

// One JSON object per line; keys in a fixed order.
std::string report_to_json_line(const EvalReport& report, bool include_timing = true);
void write_reports_jsonl(std::span<const EvalReport> reports, const std::filesystem::path& path);
std::vector<EvalReport> read_reports_jsonl(const std::filesystem::path& path);
std::string format_report_table(std::span<const EvalReport> reports);

struct AblationCondition {
  PromptStyle style;
  double train_ratio = 1.0;
  std::string label() const;  // e.g. "choice/knowledge@0.6"
};

struct AblationGrid {
  std::vector<Style> styles;
  std::vector<bool> knowledge;
  std::vector<double> ratios;
  std::vector<AblationCondition> conditions() const;  // styles x knowledge x ratios
};

// First floor(ratio * |train|) samples of a seeded shuffle of train.
std::vector<Sample> train_subset(std::span<const Sample> train, double ratio, std::uint64_t seed);

using PipelineFactory =
    std::function<std::unique_ptr<Predictor>(const AblationCondition& condition, std::span<const Sample> train)>;

// Conditions run one after another; evaluation is on split.test.
std::vector<EvalReport> run_ablation(const AblationGrid& grid, const DatasetSplit& split,
                                     const PipelineFactory& factory, std::uint64_t seed, unsigned threads = 1);

}  // namespace polyg2p
