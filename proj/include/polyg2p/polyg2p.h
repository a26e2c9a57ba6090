/* polyg2p: knowledge-augmented Mandarin polyphone disambiguation.
 *
 * Every function returning polyg2p_status leaves a message retrievable with
 * polyg2p_last_error() on failure (per thread). Strings handed out through
 * char** parameters belong to the caller and are released with
 * polyg2p_string_free(). All text is UTF-8.
 */
#ifndef POLYG2P_H
#define POLYG2P_H

#include <stddef.h>
#include <stdint.h>

#if defined(POLYG2P_BUILDING)
#define POLYG2P_API __attribute__((visibility("default")))
#else
#define POLYG2P_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum polyg2p_status {
  POLYG2P_OK = 0,
  POLYG2P_E_INVALID_ARGUMENT,
  POLYG2P_E_IO,
  POLYG2P_E_SCHEMA,
  POLYG2P_E_FORMAT,
  POLYG2P_E_MALFORMED_PINYIN,
  POLYG2P_E_UNKNOWN_CHARACTER,
  POLYG2P_E_INDEX_OUT_OF_RANGE,
  POLYG2P_E_INVALID_INDEX,
  POLYG2P_E_SEQUENCE_TOO_LONG,
  POLYG2P_E_ANSWER_TOO_LONG,
  POLYG2P_E_EMPTY_DATASET,
  POLYG2P_E_EMPTY_CANDIDATE_LIST,
  POLYG2P_E_BACKEND_UNAVAILABLE,
  POLYG2P_E_CHECKPOINT,
  POLYG2P_E_INTERNAL
} polyg2p_status;

typedef enum polyg2p_style { POLYG2P_STYLE_COMPLETION = 0, POLYG2P_STYLE_CHOICE = 1 } polyg2p_style;

typedef enum polyg2p_split { POLYG2P_SPLIT_TRAIN = 0, POLYG2P_SPLIT_DEV = 1, POLYG2P_SPLIT_TEST = 2 } polyg2p_split;

typedef struct polyg2p_dictionary polyg2p_dictionary;
typedef struct polyg2p_catalog polyg2p_catalog;
typedef struct polyg2p_backend polyg2p_backend;
typedef struct polyg2p_dataset polyg2p_dataset;
typedef struct polyg2p_reports polyg2p_reports;

POLYG2P_API const char* polyg2p_version(void);
POLYG2P_API const char* polyg2p_status_name(polyg2p_status status);
/* Message of the last failed call on this thread; "" if none. */
POLYG2P_API const char* polyg2p_last_error(void);
/* 1-based line of the last file error on this thread, 0 if not line-specific. */
POLYG2P_API size_t polyg2p_last_error_line(void);
POLYG2P_API void polyg2p_string_free(char* s);

/* ---- pinyin ---- */
POLYG2P_API polyg2p_status polyg2p_pinyin_validate(const char* text);
POLYG2P_API polyg2p_status polyg2p_edit_distance(const char* a, const char* b, size_t* out);

/* ---- dictionary ---- */
POLYG2P_API polyg2p_status polyg2p_dictionary_load(const char* path, polyg2p_dictionary** out);
/* Raw JSONL records -> polyphone dictionary. */
POLYG2P_API polyg2p_status polyg2p_dictionary_build(const char* raw_path, const char* provenance,
                                                    polyg2p_dictionary** out);
POLYG2P_API polyg2p_status polyg2p_dictionary_save(const polyg2p_dictionary* dict, const char* path);
POLYG2P_API size_t polyg2p_dictionary_size(const polyg2p_dictionary* dict);
/* JSON object mapping candidate count to number of characters, e.g. {"2":2}. */
POLYG2P_API polyg2p_status polyg2p_dictionary_histogram(const polyg2p_dictionary* dict, char** out_json);
/* Space-separated candidates in frequency order; "" for an unknown character. */
POLYG2P_API polyg2p_status polyg2p_dictionary_candidates(const polyg2p_dictionary* dict, const char* character,
                                                         char** out);
POLYG2P_API void polyg2p_dictionary_free(polyg2p_dictionary* dict);

/* ---- prompt templates ---- */
POLYG2P_API polyg2p_status polyg2p_catalog_builtin(polyg2p_catalog** out);
POLYG2P_API polyg2p_status polyg2p_catalog_load(const char* path, polyg2p_catalog** out);
POLYG2P_API void polyg2p_catalog_free(polyg2p_catalog* catalog);

typedef struct polyg2p_prompt_options {
  polyg2p_style style;
  int include_knowledge;
  int name_candidates; /* completion only */
  int max_definitions;
  int max_phrases;
} polyg2p_prompt_options;

POLYG2P_API void polyg2p_prompt_options_default(polyg2p_prompt_options* options);

/* target_index < 0: the sentence carries U+2582 markers around the target.
 * Otherwise it is the code point index of the target in an unmarked sentence. */
POLYG2P_API polyg2p_status polyg2p_render_prompt(const polyg2p_dictionary* dict, const polyg2p_catalog* catalog,
                                                 const char* sentence, long target_index,
                                                 const polyg2p_prompt_options* options, char** out);

/* ---- generation backends ---- */
/* "toy:<checkpoint>" or "remote:<http-url>". */
POLYG2P_API polyg2p_status polyg2p_backend_open(const char* selector, int timeout_ms, polyg2p_backend** out);
POLYG2P_API polyg2p_status polyg2p_backend_generate(const polyg2p_backend* backend, const char* prompt,
                                                    int max_new_tokens, int greedy, char** out);
POLYG2P_API polyg2p_status polyg2p_backend_id(const polyg2p_backend* backend, char** out);
POLYG2P_API void polyg2p_backend_free(polyg2p_backend* backend);

typedef struct polyg2p_prediction {
  char* pinyin;     /* "" when no pinyin could be produced */
  char* provenance; /* "valid" | "corrected" | "unchecked" */
  char* generated;  /* raw backend text */
  char* prompt;
} polyg2p_prediction;

POLYG2P_API polyg2p_status polyg2p_predict(const polyg2p_dictionary* dict, const polyg2p_catalog* catalog,
                                           const polyg2p_backend* backend, const char* sentence, long target_index,
                                           const polyg2p_prompt_options* options, int max_new_tokens,
                                           polyg2p_prediction* out);
POLYG2P_API void polyg2p_prediction_free(polyg2p_prediction* prediction);

/* ---- datasets ---- */
/* A directory with train/dev/test files is used as published; a single file
 * is re-split 8:1:1 with seed. */
POLYG2P_API polyg2p_status polyg2p_dataset_load(const char* path, uint64_t seed, int enforce_length,
                                                polyg2p_dataset** out);
POLYG2P_API size_t polyg2p_dataset_size(const polyg2p_dataset* dataset, polyg2p_split split);
/* "published" or "resplit". */
POLYG2P_API const char* polyg2p_dataset_source(const polyg2p_dataset* dataset);
/* JSON statistics over all splits; dict may be NULL. */
POLYG2P_API polyg2p_status polyg2p_dataset_stats(const polyg2p_dataset* dataset, const polyg2p_dictionary* dict,
                                                 char** out_json);
POLYG2P_API void polyg2p_dataset_free(polyg2p_dataset* dataset);

/* ---- toy model training ---- */
typedef struct polyg2p_toy_options {
  int n_layers;
  int d_model;
  int n_heads;
  int d_ff;
  int max_seq_len; /* <= 0: sized from the training prompts */
  int prefix_len;
  int post_norm;
  int epochs;
  int batch_size;
  double lr;
  double weight_decay;
  int backbone_frozen;
  size_t max_steps; /* 0: no cap */
  int max_new_tokens;
  uint64_t seed;
} polyg2p_toy_options;

POLYG2P_API void polyg2p_toy_options_default(polyg2p_toy_options* options);

/* epoch is 0-based. */
typedef void (*polyg2p_epoch_callback)(int epoch, double mean_loss, void* user);

/* Trains on the first floor(train_ratio * |train|) samples of a seeded shuffle
 * of the train split and writes a checkpoint. log_json (optional) receives
 * the per-epoch losses and example counts. */
POLYG2P_API polyg2p_status polyg2p_train_toy(const polyg2p_dictionary* dict, const polyg2p_catalog* catalog,
                                             const polyg2p_dataset* dataset, const polyg2p_prompt_options* prompt,
                                             const polyg2p_toy_options* toy, double train_ratio,
                                             const char* checkpoint_path, polyg2p_epoch_callback on_epoch,
                                             void* user, char** log_json);

/* ---- evaluation ---- */
typedef struct polyg2p_eval_options {
  polyg2p_split split; /* evaluated split */
  unsigned threads;
  uint64_t seed;
  int max_new_tokens;
} polyg2p_eval_options;

POLYG2P_API void polyg2p_eval_options_default(polyg2p_eval_options* options);

/* Majority-vote baseline trained on the train split. */
POLYG2P_API polyg2p_status polyg2p_evaluate_majority(const polyg2p_dataset* dataset,
                                                     const polyg2p_eval_options* options, polyg2p_reports** out);
POLYG2P_API polyg2p_status polyg2p_evaluate_pipeline(const polyg2p_dictionary* dict, const polyg2p_catalog* catalog,
                                                     const polyg2p_backend* backend, const polyg2p_dataset* dataset,
                                                     const polyg2p_prompt_options* prompt,
                                                     const polyg2p_eval_options* options, polyg2p_reports** out);

typedef struct polyg2p_grid {
  const polyg2p_style* styles;
  size_t n_styles;
  const int* knowledge;
  size_t n_knowledge;
  const double* ratios;
  size_t n_ratios;
} polyg2p_grid;

/* One report per grid condition on the test split. backend == NULL trains a
 * toy model per condition with `toy`; otherwise the given backend is used
 * for every condition. */
POLYG2P_API polyg2p_status polyg2p_ablate(const polyg2p_dictionary* dict, const polyg2p_catalog* catalog,
                                          const polyg2p_dataset* dataset, const polyg2p_grid* grid,
                                          const polyg2p_backend* backend, const polyg2p_prompt_options* base,
                                          const polyg2p_toy_options* toy, const polyg2p_eval_options* options,
                                          polyg2p_reports** out);

POLYG2P_API size_t polyg2p_reports_count(const polyg2p_reports* reports);
POLYG2P_API double polyg2p_reports_accuracy(const polyg2p_reports* reports, size_t index);
/* One JSON object per line; include_timing = 0 drops wall_clock_seconds. */
POLYG2P_API polyg2p_status polyg2p_reports_jsonl(const polyg2p_reports* reports, int include_timing, char** out);
POLYG2P_API polyg2p_status polyg2p_reports_table(const polyg2p_reports* reports, char** out);
POLYG2P_API polyg2p_status polyg2p_reports_write(const polyg2p_reports* reports, const char* path);
POLYG2P_API void polyg2p_reports_free(polyg2p_reports* reports);

#ifdef __cplusplus
}
#endif

#endif /* POLYG2P_H */
