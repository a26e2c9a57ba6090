#include "pipeline.hpp"

#include <algorithm>

#include "error.hpp"
#include "utf8.hpp"

namespace polyg2p {

std::string PipelineResult::provenance() const {
  if (!correction) return "unchecked";
  return correction->was_valid ? "valid" : "corrected";
}

KnowledgePipeline::KnowledgePipeline(std::shared_ptr<const Dictionary> dict,
                                     std::shared_ptr<const TemplateCatalog> catalog,
                                     std::shared_ptr<const GenerationBackend> backend, PipelineOptions options)
    : dict_(std::move(dict)), catalog_(std::move(catalog)), backend_(std::move(backend)), options_(options) {
  if (!dict_ || !catalog_ || !backend_) throw Error(ErrorKind::InvalidArgument, "pipeline needs all components");
}

PipelineResult KnowledgePipeline::run(const Sample& sample) const {
  PipelineResult result;
  result.prompt = build_prompt(sample, *dict_, options_.style, options_.limits, *catalog_);
  result.generated = backend_->generate({result.prompt.text, options_.max_new_tokens, options_.greedy});
  result.extracted = extract_answer(result.generated);
  const auto cands = candidates(*dict_, sample.target_utf8());
  if (!cands.empty()) {
    result.correction = correct(result.extracted, cands);
    result.final_pinyin = result.correction->final_pinyin;
  } else if (is_pinyin(result.extracted)) {
    result.final_pinyin = parse_pinyin(result.extracted);
  }
  return result;
}

Prediction KnowledgePipeline::predict(const Sample& sample) const {
  const auto r = run(sample);
  Prediction p;
  p.pinyin = r.final_pinyin;
  p.generated = true;
  p.valid_generation = r.correction ? r.correction->was_valid : r.final_pinyin.has_value();
  return p;
}

ToyModel train_toy_model(const Dictionary& dict, const TemplateCatalog& catalog, const PipelineOptions& pipeline,
                         std::span<const Sample> train, ToyGlmConfig config, TrainOptions options,
                         ToyTrainingReport* report, const EpochCallback& on_epoch) {
  struct Rendered {
    std::string prompt;
    std::string answer;
  };
  std::vector<Rendered> rendered;
  std::size_t skipped = 0;
  for (const auto& s : train) {
    if (!s.gold) throw Error(ErrorKind::InvalidArgument, "training sample without a gold label");
    try {
      rendered.push_back({build_prompt(s, dict, pipeline.style, pipeline.limits, catalog).text, s.gold->text()});
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::UnknownCharacter) throw;
      ++skipped;
    }
  }
  if (rendered.empty()) throw Error(ErrorKind::EmptyDataset, "no training sample could be rendered");

  std::vector<std::string> corpus = {"abcdefghijklmnopqrstuvwxyz12345"};
  for (const auto& r : rendered) {
    corpus.push_back(r.prompt);
    corpus.push_back(r.answer);
  }
  const auto layout = catalog.knowledge_layout();
  for (const auto& [cp, entry] : dict.entries()) {
    corpus.push_back(knowledge_block(dict, utf8::encode(cp), pipeline.limits, layout));
  }

  ToyModel model;
  model.vocab = Vocabulary::build(corpus);
  config.vocab_size = model.vocab.size();
  options.max_new_tokens = pipeline.max_new_tokens;

  std::vector<TrainingExample> examples;
  examples.reserve(rendered.size());
  std::size_t longest = 0;
  for (const auto& r : rendered) {
    examples.push_back({model.vocab.tokenize(r.prompt), model.vocab.tokenize(r.answer)});
    longest = std::max(longest, examples.back().prompt_ids.size());
  }
  if (config.max_seq_len <= 0) {
    config.max_seq_len = static_cast<int>(longest) + 1 + pipeline.max_new_tokens + 16;
  }
  config.validate();
  model.config = config;
  model.params = ModelParams::initialize(config);
  auto result = polyg2p::train(model.params, config, examples, options, on_epoch);
  if (report) {
    report->train = std::move(result);
    report->n_examples = examples.size();
    report->n_skipped = skipped;
  }
  return model;
}

PipelineFactory toy_pipeline_factory(std::shared_ptr<const Dictionary> dict,
                                     std::shared_ptr<const TemplateCatalog> catalog, PipelineOptions base,
                                     ToyGlmConfig config, TrainOptions options) {
  return [=](const AblationCondition& condition, std::span<const Sample> train) -> std::unique_ptr<Predictor> {
    PipelineOptions po = base;
    po.style = condition.style;
    auto model = train_toy_model(*dict, *catalog, po, train, config, options);
    auto backend = std::make_shared<ToyBackend>(std::move(model), "toy");
    return std::make_unique<KnowledgePipeline>(dict, catalog, std::move(backend), po);
  };
}

}  // namespace polyg2p
