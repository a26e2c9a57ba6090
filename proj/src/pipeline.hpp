#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>

#include "dictionary.hpp"
#include "eval.hpp"
#include "generation/backend.hpp"
#include "generation/train.hpp"
#include "postprocess.hpp"
#include "prompting.hpp"

namespace polyg2p {

struct PipelineOptions {
  PromptStyle style;
  KnowledgeLimits limits;
  int max_new_tokens = 8;
  bool greedy = true;
};

struct PipelineResult {
  Prompt prompt;
  std::string generated;
  std::string extracted;
  std::optional<PinyinSyllable> final_pinyin;
  // Empty when the dictionary has no candidates for the target.
  std::optional<CorrectionOutcome> correction;

  // "valid", "corrected", or "unchecked" (no candidate list to project onto).
  std::string provenance() const;
};

// mark -> prompt -> generate -> correct.
class KnowledgePipeline final : public Predictor {
 public:
  KnowledgePipeline(std::shared_ptr<const Dictionary> dict, std::shared_ptr<const TemplateCatalog> catalog,
                    std::shared_ptr<const GenerationBackend> backend, PipelineOptions options);

  // Throws Error(UnknownCharacter) for a multiple-choice prompt on a character
  // the dictionary lacks; backend errors propagate.
  PipelineResult run(const Sample& sample) const;

  Prediction predict(const Sample& sample) const override;
  std::string id() const override { return backend_->id(); }
  const PipelineOptions& options() const noexcept { return options_; }

 private:
  std::shared_ptr<const Dictionary> dict_;
  std::shared_ptr<const TemplateCatalog> catalog_;
  std::shared_ptr<const GenerationBackend> backend_;
  PipelineOptions options_;
};

struct ToyTrainingReport {
  TrainResult train;
  std::size_t n_examples = 0;
  std::size_t n_skipped = 0;  // rows the prompt style cannot render
};

// Renders every training sample with `style`, builds the vocabulary from the
// prompts, answers and dictionary knowledge, then trains a fresh model.
// config.vocab_size is overwritten; max_seq_len <= 0 sizes the context from
// the longest training prompt plus 16 spare tokens.
ToyModel train_toy_model(const Dictionary& dict, const TemplateCatalog& catalog, const PipelineOptions& pipeline,
                         std::span<const Sample> train, ToyGlmConfig config, TrainOptions options,
                         ToyTrainingReport* report = nullptr, const EpochCallback& on_epoch = {});

// Factory for run_ablation: trains one toy model per condition.
PipelineFactory toy_pipeline_factory(std::shared_ptr<const Dictionary> dict,
                                     std::shared_ptr<const TemplateCatalog> catalog, PipelineOptions base,
                                     ToyGlmConfig config, TrainOptions options);

}  // namespace polyg2p
