#include "polyg2p/polyg2p.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include <json.hpp>

#include "dataset.hpp"
#include "dictionary.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "generation/backend.hpp"
#include "pinyin.hpp"
#include "pipeline.hpp"
#include "prompting.hpp"

using namespace polyg2p;

struct polyg2p_dictionary {
  std::shared_ptr<const Dictionary> dict;
};
struct polyg2p_catalog {
  std::shared_ptr<const TemplateCatalog> catalog;
};
struct polyg2p_backend {
  std::shared_ptr<const GenerationBackend> backend;
};
struct polyg2p_dataset {
  DatasetSplit split;
};
struct polyg2p_reports {
  std::vector<EvalReport> reports;
};

namespace {

thread_local std::string g_last_error;
thread_local std::size_t g_last_line = 0;

polyg2p_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedPinyin: return POLYG2P_E_MALFORMED_PINYIN;
    case ErrorKind::Io: return POLYG2P_E_IO;
    case ErrorKind::Schema: return POLYG2P_E_SCHEMA;
    case ErrorKind::Format: return POLYG2P_E_FORMAT;
    case ErrorKind::UnknownCharacter: return POLYG2P_E_UNKNOWN_CHARACTER;
    case ErrorKind::IndexOutOfRange: return POLYG2P_E_INDEX_OUT_OF_RANGE;
    case ErrorKind::InvalidIndex: return POLYG2P_E_INVALID_INDEX;
    case ErrorKind::SequenceTooLong: return POLYG2P_E_SEQUENCE_TOO_LONG;
    case ErrorKind::AnswerTooLong: return POLYG2P_E_ANSWER_TOO_LONG;
    case ErrorKind::EmptyDataset: return POLYG2P_E_EMPTY_DATASET;
    case ErrorKind::EmptyCandidateList: return POLYG2P_E_EMPTY_CANDIDATE_LIST;
    case ErrorKind::BackendUnavailable: return POLYG2P_E_BACKEND_UNAVAILABLE;
    case ErrorKind::InvalidArgument: return POLYG2P_E_INVALID_ARGUMENT;
    case ErrorKind::Checkpoint: return POLYG2P_E_CHECKPOINT;
  }
  return POLYG2P_E_INTERNAL;
}

polyg2p_status fail(polyg2p_status status, std::string message, std::size_t line = 0) {
  g_last_error = std::move(message);
  g_last_line = line;
  return status;
}

// Runs body, translating exceptions into status codes.
template <class F>
polyg2p_status guarded(F&& body) {
  g_last_error.clear();
  g_last_line = 0;
  try {
    body();
    return POLYG2P_OK;
  } catch (const LineError& e) {
    return fail(status_of(e.kind()), e.what(), e.line());
  } catch (const Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(POLYG2P_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(POLYG2P_E_INTERNAL, e.what());
  } catch (...) {
    return fail(POLYG2P_E_INTERNAL, "unknown failure");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorKind::InvalidArgument, what);
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

PipelineOptions pipeline_options(const polyg2p_prompt_options* o, int max_new_tokens) {
  polyg2p_prompt_options d;
  polyg2p_prompt_options_default(&d);
  if (!o) o = &d;
  PipelineOptions p;
  p.style.style = o->style == POLYG2P_STYLE_COMPLETION ? Style::Completion : Style::MultipleChoice;
  p.style.include_knowledge = o->include_knowledge != 0;
  p.style.name_candidates = o->name_candidates != 0;
  p.limits.max_definitions = o->max_definitions;
  p.limits.max_phrases = o->max_phrases;
  if (max_new_tokens > 0) p.max_new_tokens = max_new_tokens;
  return p;
}

Sample make_sample(const char* sentence, long target_index) {
  require(sentence != nullptr, "sentence is NULL");
  if (target_index < 0) return sample_from_marked(sentence);
  return Sample::at(sentence, static_cast<std::size_t>(target_index));
}

void split_toy(const polyg2p_toy_options* t, ToyGlmConfig& config, TrainOptions& train) {
  polyg2p_toy_options d;
  polyg2p_toy_options_default(&d);
  if (!t) t = &d;
  config.n_layers = t->n_layers;
  config.d_model = t->d_model;
  config.n_heads = t->n_heads;
  config.d_ff = t->d_ff;
  config.max_seq_len = t->max_seq_len;
  config.prefix_len = t->prefix_len;
  config.norm = t->post_norm ? NormPlacement::Post : NormPlacement::Pre;
  config.seed = t->seed;
  train.epochs = t->epochs;
  train.batch_size = t->batch_size;
  train.lr = t->lr;
  train.weight_decay = t->weight_decay;
  train.backbone_frozen = t->backbone_frozen != 0;
  train.max_steps = t->max_steps;
  train.max_new_tokens = t->max_new_tokens;
  train.seed = t->seed;
}

const std::vector<Sample>& part(const DatasetSplit& s, polyg2p_split which) {
  switch (which) {
    case POLYG2P_SPLIT_TRAIN: return s.train;
    case POLYG2P_SPLIT_DEV: return s.dev;
    case POLYG2P_SPLIT_TEST: return s.test;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown split");
}

const char* split_name(polyg2p_split which) {
  switch (which) {
    case POLYG2P_SPLIT_TRAIN: return "train";
    case POLYG2P_SPLIT_DEV: return "dev";
    case POLYG2P_SPLIT_TEST: return "test";
  }
  return "?";
}

polyg2p_eval_options eval_options(const polyg2p_eval_options* o) {
  polyg2p_eval_options d;
  polyg2p_eval_options_default(&d);
  return o ? *o : d;
}

}  // namespace

extern "C" {

const char* polyg2p_version(void) { return "0.1.0"; }

const char* polyg2p_status_name(polyg2p_status status) {
  switch (status) {
    case POLYG2P_OK: return "ok";
    case POLYG2P_E_INVALID_ARGUMENT: return "InvalidArgument";
    case POLYG2P_E_IO: return "IoError";
    case POLYG2P_E_SCHEMA: return "SchemaError";
    case POLYG2P_E_FORMAT: return "FormatError";
    case POLYG2P_E_MALFORMED_PINYIN: return "MalformedPinyin";
    case POLYG2P_E_UNKNOWN_CHARACTER: return "UnknownCharacter";
    case POLYG2P_E_INDEX_OUT_OF_RANGE: return "IndexOutOfRange";
    case POLYG2P_E_INVALID_INDEX: return "InvalidIndex";
    case POLYG2P_E_SEQUENCE_TOO_LONG: return "SequenceTooLong";
    case POLYG2P_E_ANSWER_TOO_LONG: return "AnswerTooLong";
    case POLYG2P_E_EMPTY_DATASET: return "EmptyDataset";
    case POLYG2P_E_EMPTY_CANDIDATE_LIST: return "EmptyCandidateList";
    case POLYG2P_E_BACKEND_UNAVAILABLE: return "BackendUnavailable";
    case POLYG2P_E_CHECKPOINT: return "CheckpointError";
    case POLYG2P_E_INTERNAL: return "InternalError";
  }
  return "unknown";
}

const char* polyg2p_last_error(void) { return g_last_error.c_str(); }
size_t polyg2p_last_error_line(void) { return g_last_line; }
void polyg2p_string_free(char* s) { std::free(s); }

polyg2p_status polyg2p_pinyin_validate(const char* text) {
  return guarded([&] {
    require(text != nullptr, "text is NULL");
    (void)parse_pinyin(text);
  });
}

polyg2p_status polyg2p_edit_distance(const char* a, const char* b, size_t* out) {
  return guarded([&] {
    require(a && b && out, "NULL argument");
    *out = edit_distance(std::string_view(a), std::string_view(b));
  });
}

polyg2p_status polyg2p_dictionary_load(const char* path, polyg2p_dictionary** out) {
  return guarded([&] {
    require(path && out, "NULL argument");
    *out = new polyg2p_dictionary{std::make_shared<const Dictionary>(load_dictionary(path))};
  });
}

polyg2p_status polyg2p_dictionary_build(const char* raw_path, const char* provenance, polyg2p_dictionary** out) {
  return guarded([&] {
    require(raw_path && out, "NULL argument");
    auto dict = build_dictionary(load_raw_records(raw_path), provenance ? provenance : "");
    *out = new polyg2p_dictionary{std::make_shared<const Dictionary>(std::move(dict))};
  });
}

polyg2p_status polyg2p_dictionary_save(const polyg2p_dictionary* dict, const char* path) {
  return guarded([&] {
    require(dict && path, "NULL argument");
    save_dictionary(*dict->dict, path);
  });
}

size_t polyg2p_dictionary_size(const polyg2p_dictionary* dict) { return dict ? dict->dict->entry_count() : 0; }

polyg2p_status polyg2p_dictionary_histogram(const polyg2p_dictionary* dict, char** out_json) {
  return guarded([&] {
    require(dict && out_json, "NULL argument");
    std::map<std::size_t, std::size_t> hist;
    for (const auto& [cp, entry] : dict->dict->entries()) ++hist[entry.senses.size()];
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : hist) j[std::to_string(k)] = v;
    *out_json = dup(j.dump());
  });
}

polyg2p_status polyg2p_dictionary_candidates(const polyg2p_dictionary* dict, const char* character, char** out) {
  return guarded([&] {
    require(dict && character && out, "NULL argument");
    std::string joined;
    for (const auto& p : candidates(*dict->dict, character)) {
      if (!joined.empty()) joined += ' ';
      joined += p.text();
    }
    *out = dup(joined);
  });
}

void polyg2p_dictionary_free(polyg2p_dictionary* dict) { delete dict; }

polyg2p_status polyg2p_catalog_builtin(polyg2p_catalog** out) {
  return guarded([&] {
    require(out != nullptr, "NULL argument");
    *out = new polyg2p_catalog{std::make_shared<const TemplateCatalog>(TemplateCatalog::builtin())};
  });
}

polyg2p_status polyg2p_catalog_load(const char* path, polyg2p_catalog** out) {
  return guarded([&] {
    require(path && out, "NULL argument");
    *out = new polyg2p_catalog{std::make_shared<const TemplateCatalog>(TemplateCatalog::load(path))};
  });
}

void polyg2p_catalog_free(polyg2p_catalog* catalog) { delete catalog; }

void polyg2p_prompt_options_default(polyg2p_prompt_options* options) {
  if (!options) return;
  const KnowledgeLimits limits;
  options->style = POLYG2P_STYLE_CHOICE;
  options->include_knowledge = 1;
  options->name_candidates = 0;
  options->max_definitions = limits.max_definitions;
  options->max_phrases = limits.max_phrases;
}

polyg2p_status polyg2p_render_prompt(const polyg2p_dictionary* dict, const polyg2p_catalog* catalog,
                                     const char* sentence, long target_index, const polyg2p_prompt_options* options,
                                     char** out) {
  return guarded([&] {
    require(dict && catalog && out, "NULL argument");
    const auto po = pipeline_options(options, 0);
    const auto sample = make_sample(sentence, target_index);
    *out = dup(build_prompt(sample, *dict->dict, po.style, po.limits, *catalog->catalog).text);
  });
}

polyg2p_status polyg2p_backend_open(const char* selector, int timeout_ms, polyg2p_backend** out) {
  return guarded([&] {
    require(selector && out, "NULL argument");
    const auto timeout = std::chrono::milliseconds(timeout_ms > 0 ? timeout_ms : 30000);
    *out = new polyg2p_backend{open_backend(selector, timeout)};
  });
}

polyg2p_status polyg2p_backend_generate(const polyg2p_backend* backend, const char* prompt, int max_new_tokens,
                                        int greedy, char** out) {
  return guarded([&] {
    require(backend && prompt && out, "NULL argument");
    *out = dup(backend->backend->generate({prompt, max_new_tokens, greedy != 0}));
  });
}

polyg2p_status polyg2p_backend_id(const polyg2p_backend* backend, char** out) {
  return guarded([&] {
    require(backend && out, "NULL argument");
    *out = dup(backend->backend->id());
  });
}

void polyg2p_backend_free(polyg2p_backend* backend) { delete backend; }

polyg2p_status polyg2p_predict(const polyg2p_dictionary* dict, const polyg2p_catalog* catalog,
                               const polyg2p_backend* backend, const char* sentence, long target_index,
                               const polyg2p_prompt_options* options, int max_new_tokens, polyg2p_prediction* out) {
  return guarded([&] {
    require(dict && catalog && backend && out, "NULL argument");
    *out = polyg2p_prediction{};
    const KnowledgePipeline pipeline(dict->dict, catalog->catalog, backend->backend,
                                     pipeline_options(options, max_new_tokens));
    const auto r = pipeline.run(make_sample(sentence, target_index));
    polyg2p_prediction p{};
    try {
      p.pinyin = dup(r.final_pinyin ? r.final_pinyin->text() : "");
      p.provenance = dup(r.provenance());
      p.generated = dup(r.generated);
      p.prompt = dup(r.prompt.text);
    } catch (...) {
      polyg2p_prediction_free(&p);
      throw;
    }
    *out = p;
  });
}

void polyg2p_prediction_free(polyg2p_prediction* prediction) {
  if (!prediction) return;
  std::free(prediction->pinyin);
  std::free(prediction->provenance);
  std::free(prediction->generated);
  std::free(prediction->prompt);
  *prediction = polyg2p_prediction{};
}

polyg2p_status polyg2p_dataset_load(const char* path, uint64_t seed, int enforce_length, polyg2p_dataset** out) {
  return guarded([&] {
    require(path && out, "NULL argument");
    CppLoadOptions options;
    options.enforce_length = enforce_length != 0;
    *out = new polyg2p_dataset{load_dataset(path, seed, options)};
  });
}

size_t polyg2p_dataset_size(const polyg2p_dataset* dataset, polyg2p_split split) {
  if (!dataset) return 0;
  try {
    return part(dataset->split, split).size();
  } catch (...) {
    return 0;
  }
}

const char* polyg2p_dataset_source(const polyg2p_dataset* dataset) {
  return dataset ? dataset->split.source.c_str() : "";
}

polyg2p_status polyg2p_dataset_stats(const polyg2p_dataset* dataset, const polyg2p_dictionary* dict,
                                     char** out_json) {
  return guarded([&] {
    require(dataset && out_json, "NULL argument");
    std::vector<Sample> all;
    for (auto which : {POLYG2P_SPLIT_TRAIN, POLYG2P_SPLIT_DEV, POLYG2P_SPLIT_TEST}) {
      const auto& p = part(dataset->split, which);
      all.insert(all.end(), p.begin(), p.end());
    }
    const auto stats = dataset_stats(all, dict ? dict->dict.get() : nullptr);
    nlohmann::ordered_json j;
    j["source"] = dataset->split.source;
    j["n_samples"] = stats.n_samples;
    j["n_train"] = dataset->split.train.size();
    j["n_dev"] = dataset->split.dev.size();
    j["n_test"] = dataset->split.test.size();
    j["n_characters"] = stats.n_characters;
    j["n_two_candidates"] = stats.n_two_candidates;
    j["two_candidate_fraction"] = stats.two_candidate_fraction;
    nlohmann::ordered_json hist = nlohmann::ordered_json::object();
    for (const auto& [k, v] : stats.candidate_histogram) hist[std::to_string(k)] = v;
    j["candidate_histogram"] = hist;
    *out_json = dup(j.dump());
  });
}

void polyg2p_dataset_free(polyg2p_dataset* dataset) { delete dataset; }

void polyg2p_toy_options_default(polyg2p_toy_options* options) {
  if (!options) return;
  const ToyGlmConfig c;
  const TrainOptions t;
  options->n_layers = c.n_layers;
  options->d_model = c.d_model;
  options->n_heads = c.n_heads;
  options->d_ff = c.d_ff;
  options->max_seq_len = 0;
  options->prefix_len = c.prefix_len;
  options->post_norm = c.norm == NormPlacement::Post;
  options->epochs = t.epochs;
  options->batch_size = t.batch_size;
  options->lr = t.lr;
  options->weight_decay = t.weight_decay;
  options->backbone_frozen = t.backbone_frozen;
  options->max_steps = t.max_steps;
  options->max_new_tokens = t.max_new_tokens;
  options->seed = 0;
}

polyg2p_status polyg2p_train_toy(const polyg2p_dictionary* dict, const polyg2p_catalog* catalog,
                                 const polyg2p_dataset* dataset, const polyg2p_prompt_options* prompt,
                                 const polyg2p_toy_options* toy, double train_ratio, const char* checkpoint_path,
                                 polyg2p_epoch_callback on_epoch, void* user, char** log_json) {
  return guarded([&] {
    require(dict && catalog && dataset && checkpoint_path, "NULL argument");
    ToyGlmConfig config;
    TrainOptions train;
    split_toy(toy, config, train);
    const auto po = pipeline_options(prompt, train.max_new_tokens);
    const auto subset = train_subset(dataset->split.train, train_ratio, train.seed);
    ToyTrainingReport report;
    EpochCallback cb;
    if (on_epoch) cb = [&](int epoch, double loss) { on_epoch(epoch, loss, user); };
    const auto model = train_toy_model(*dict->dict, *catalog->catalog, po, subset, config, train, &report, cb);
    save_checkpoint(model, checkpoint_path);
    if (log_json) {
      nlohmann::ordered_json j;
      j["style"] = po.style.label();
      j["train_ratio"] = train_ratio;
      j["seed"] = train.seed;
      j["n_examples"] = report.n_examples;
      j["n_skipped"] = report.n_skipped;
      j["steps"] = report.train.steps;
      j["vocab_size"] = model.config.vocab_size;
      j["max_seq_len"] = model.config.max_seq_len;
      j["parameters"] = model.params.parameter_count();
      j["epoch_loss"] = report.train.epoch_loss;
      *log_json = dup(j.dump());
    }
  });
}

void polyg2p_eval_options_default(polyg2p_eval_options* options) {
  if (!options) return;
  options->split = POLYG2P_SPLIT_TEST;
  options->threads = 1;
  options->seed = 0;
  options->max_new_tokens = 8;
}

polyg2p_status polyg2p_evaluate_majority(const polyg2p_dataset* dataset, const polyg2p_eval_options* options,
                                         polyg2p_reports** out) {
  return guarded([&] {
    require(dataset && out, "NULL argument");
    const auto eo = eval_options(options);
    const MajorityPredictor predictor(train_majority(dataset->split.train));
    RunInfo run;
    run.seed = eo.seed;
    run.backend = predictor.id();
    run.split_source = dataset->split.source;
    run.n_train = dataset->split.train.size();
    auto report = evaluate(predictor, part(dataset->split, eo.split), std::string("majority@") + split_name(eo.split),
                           run, eo.threads);
    *out = new polyg2p_reports{{std::move(report)}};
  });
}

polyg2p_status polyg2p_evaluate_pipeline(const polyg2p_dictionary* dict, const polyg2p_catalog* catalog,
                                         const polyg2p_backend* backend, const polyg2p_dataset* dataset,
                                         const polyg2p_prompt_options* prompt, const polyg2p_eval_options* options,
                                         polyg2p_reports** out) {
  return guarded([&] {
    require(dict && catalog && backend && dataset && out, "NULL argument");
    const auto eo = eval_options(options);
    const KnowledgePipeline pipeline(dict->dict, catalog->catalog, backend->backend,
                                     pipeline_options(prompt, eo.max_new_tokens));
    RunInfo run;
    run.style = std::string(style_name(pipeline.options().style.style));
    run.knowledge = pipeline.options().style.include_knowledge ? "on" : "off";
    run.seed = eo.seed;
    run.backend = pipeline.id();
    run.split_source = dataset->split.source;
    run.n_train = dataset->split.train.size();
    auto report = evaluate(pipeline, part(dataset->split, eo.split),
                           pipeline.options().style.label() + "@" + split_name(eo.split), run, eo.threads);
    *out = new polyg2p_reports{{std::move(report)}};
  });
}

polyg2p_status polyg2p_ablate(const polyg2p_dictionary* dict, const polyg2p_catalog* catalog,
                              const polyg2p_dataset* dataset, const polyg2p_grid* grid,
                              const polyg2p_backend* backend, const polyg2p_prompt_options* base,
                              const polyg2p_toy_options* toy, const polyg2p_eval_options* options,
                              polyg2p_reports** out) {
  return guarded([&] {
    require(dict && catalog && dataset && grid && out, "NULL argument");
    const auto eo = eval_options(options);
    AblationGrid g;
    for (std::size_t i = 0; i < grid->n_styles; ++i) {
      g.styles.push_back(grid->styles[i] == POLYG2P_STYLE_COMPLETION ? Style::Completion : Style::MultipleChoice);
    }
    for (std::size_t i = 0; i < grid->n_knowledge; ++i) g.knowledge.push_back(grid->knowledge[i] != 0);
    for (std::size_t i = 0; i < grid->n_ratios; ++i) g.ratios.push_back(grid->ratios[i]);

    const auto po = pipeline_options(base, eo.max_new_tokens);
    PipelineFactory factory;
    if (backend) {
      auto shared = backend->backend;
      auto d = dict->dict;
      auto c = catalog->catalog;
      factory = [=](const AblationCondition& condition, std::span<const Sample>) -> std::unique_ptr<Predictor> {
        PipelineOptions p = po;
        p.style = condition.style;
        return std::make_unique<KnowledgePipeline>(d, c, shared, p);
      };
    } else {
      ToyGlmConfig config;
      TrainOptions train;
      split_toy(toy, config, train);
      factory = toy_pipeline_factory(dict->dict, catalog->catalog, po, config, train);
    }
    *out = new polyg2p_reports{run_ablation(g, dataset->split, factory, eo.seed, eo.threads)};
  });
}

size_t polyg2p_reports_count(const polyg2p_reports* reports) { return reports ? reports->reports.size() : 0; }

double polyg2p_reports_accuracy(const polyg2p_reports* reports, size_t index) {
  if (!reports || index >= reports->reports.size()) return -1.0;
  return reports->reports[index].accuracy;
}

polyg2p_status polyg2p_reports_jsonl(const polyg2p_reports* reports, int include_timing, char** out) {
  return guarded([&] {
    require(reports && out, "NULL argument");
    std::string text;
    for (const auto& r : reports->reports) text += report_to_json_line(r, include_timing != 0) + "\n";
    *out = dup(text);
  });
}

polyg2p_status polyg2p_reports_table(const polyg2p_reports* reports, char** out) {
  return guarded([&] {
    require(reports && out, "NULL argument");
    *out = dup(format_report_table(reports->reports));
  });
}

polyg2p_status polyg2p_reports_write(const polyg2p_reports* reports, const char* path) {
  return guarded([&] {
    require(reports && path, "NULL argument");
    write_reports_jsonl(reports->reports, path);
  });
}

void polyg2p_reports_free(polyg2p_reports* reports) { delete reports; }

}  // extern "C"
