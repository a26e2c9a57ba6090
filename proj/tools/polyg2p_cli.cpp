// polyg2p command-line front end. Talks to the library only through the C API.
//
// Exit codes: 0 ok, 1 usage, 2 data/schema, 3 backend.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "polyg2p/polyg2p.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitBackend = 3;

struct Failure {
  int code;
  std::string message;
};

int exit_code_for(polyg2p_status s) {
  switch (s) {
    case POLYG2P_OK: return 0;
    case POLYG2P_E_INVALID_ARGUMENT: return kExitUsage;
    case POLYG2P_E_BACKEND_UNAVAILABLE: return kExitBackend;
    default: return kExitData;
  }
}

void check(polyg2p_status s) {
  if (s != POLYG2P_OK) {
    throw Failure{exit_code_for(s), std::string(polyg2p_status_name(s)) + ": " + polyg2p_last_error()};
  }
}

// Owning wrappers for C handles and strings.
template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using DictPtr = std::unique_ptr<polyg2p_dictionary, Deleter<polyg2p_dictionary, polyg2p_dictionary_free>>;
using CatalogPtr = std::unique_ptr<polyg2p_catalog, Deleter<polyg2p_catalog, polyg2p_catalog_free>>;
using BackendPtr = std::unique_ptr<polyg2p_backend, Deleter<polyg2p_backend, polyg2p_backend_free>>;
using DatasetPtr = std::unique_ptr<polyg2p_dataset, Deleter<polyg2p_dataset, polyg2p_dataset_free>>;
using ReportsPtr = std::unique_ptr<polyg2p_reports, Deleter<polyg2p_reports, polyg2p_reports_free>>;

std::string take(char* s) {
  std::string out = s ? s : "";
  polyg2p_string_free(s);
  return out;
}

struct Common {
  std::string dict;
  std::string data;
  std::string templates;
  std::string style = "choice";
  std::string knowledge = "on";
  std::string backend;
  std::uint64_t seed = 0;
  std::string out;
  double ratio = 1.0;
  bool any_length = false;
  int timeout_ms = 30000;
};

struct ToyFlags {
  polyg2p_toy_options o{};
  ToyFlags() { polyg2p_toy_options_default(&o); }
};

void add_toy_flags(CLI::App* cmd, ToyFlags& t) {
  cmd->add_option("--layers", t.o.n_layers, "transformer layers")->capture_default_str();
  cmd->add_option("--d-model", t.o.d_model, "hidden size")->capture_default_str();
  cmd->add_option("--heads", t.o.n_heads, "attention heads")->capture_default_str();
  cmd->add_option("--d-ff", t.o.d_ff, "feed-forward size")->capture_default_str();
  cmd->add_option("--prefix-len", t.o.prefix_len, "prefix key/value length per layer")->capture_default_str();
  cmd->add_option("--max-seq-len", t.o.max_seq_len, "context size, 0 = fit training prompts")->capture_default_str();
  cmd->add_option("--epochs", t.o.epochs, "training epochs")->capture_default_str();
  cmd->add_option("--batch-size", t.o.batch_size, "batch size")->capture_default_str();
  cmd->add_option("--lr", t.o.lr, "AdamW learning rate")->capture_default_str();
  cmd->add_option("--weight-decay", t.o.weight_decay, "AdamW decoupled weight decay")->capture_default_str();
  cmd->add_option("--max-steps", t.o.max_steps, "stop after this many steps, 0 = no cap")->capture_default_str();
  cmd->add_option("--max-new-tokens", t.o.max_new_tokens, "answer token budget including EOS")
      ->capture_default_str();
  cmd->add_flag("--frozen", t.o.backbone_frozen, "train prefix tensors only");
  cmd->add_flag("--post-norm", t.o.post_norm, "post-norm layers instead of pre-norm");
}

CLI::Option* add_dict(CLI::App* cmd, Common& c, bool required) {
  auto* o = cmd->add_option("--dict", c.dict, "polyphone dictionary (JSONL)")->check(CLI::ExistingFile);
  if (required) o->required();
  return o;
}

void add_prompt_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--templates", c.templates, "template catalog, default built-in")->check(CLI::ExistingFile);
  cmd->add_option("--style", c.style, "prompt style")
      ->check(CLI::IsMember({"completion", "choice"}))
      ->capture_default_str();
  cmd->add_option("--knowledge", c.knowledge, "include dictionary knowledge")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
}

void add_data(CLI::App* cmd, Common& c) {
  cmd->add_option("--data", c.data, "CPP data: directory with train/dev/test, or one file to re-split 8:1:1")
      ->required()
      ->check(CLI::ExistingPath);
  cmd->add_flag("--any-length", c.any_length, "accept sentences outside 5..50 characters");
}

polyg2p_prompt_options prompt_options(const Common& c) {
  polyg2p_prompt_options p;
  polyg2p_prompt_options_default(&p);
  p.style = c.style == "completion" ? POLYG2P_STYLE_COMPLETION : POLYG2P_STYLE_CHOICE;
  p.include_knowledge = c.knowledge == "on";
  return p;
}

DictPtr open_dict(const std::string& path) {
  polyg2p_dictionary* d = nullptr;
  check(polyg2p_dictionary_load(path.c_str(), &d));
  return DictPtr(d);
}

CatalogPtr open_catalog(const std::string& path) {
  polyg2p_catalog* c = nullptr;
  check(path.empty() ? polyg2p_catalog_builtin(&c) : polyg2p_catalog_load(path.c_str(), &c));
  return CatalogPtr(c);
}

DatasetPtr open_dataset(const Common& c) {
  polyg2p_dataset* d = nullptr;
  check(polyg2p_dataset_load(c.data.c_str(), c.seed, c.any_length ? 0 : 1, &d));
  return DatasetPtr(d);
}

BackendPtr open_backend(const std::string& selector, int timeout_ms) {
  polyg2p_backend* b = nullptr;
  check(polyg2p_backend_open(selector.c_str(), timeout_ms, &b));
  return BackendPtr(b);
}

// --backend, else POLYG2P_BACKEND_URL as a remote backend.
std::optional<std::string> resolve_backend(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("POLYG2P_BACKEND_URL"); env && *env) return std::string("remote:") + env;
  return std::nullopt;
}

fs::path ensure_out(const std::string& out) {
  if (out.empty()) throw Failure{kExitUsage, "--out is required"};
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Failure{kExitData, "cannot create " + out + ": " + ec.message()};
  return fs::path(out);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) throw Failure{kExitData, "cannot write " + path.string()};
}

void write_reports(const polyg2p_reports* reports, const fs::path& dir, const std::string& stem) {
  check(polyg2p_reports_write(reports, (dir / (stem + ".jsonl")).string().c_str()));
  char* table = nullptr;
  check(polyg2p_reports_table(reports, &table));
  const auto text = take(table);
  write_text(dir / (stem + ".txt"), text);
  std::cout << text;
}

void on_epoch(int epoch, double loss, void*) { std::fprintf(stderr, "epoch %d  loss %.6f\n", epoch + 1, loss); }

void run_build_dict(const std::string& raw, const std::string& out, const std::string& provenance) {
  polyg2p_dictionary* d = nullptr;
  check(polyg2p_dictionary_build(raw.c_str(), provenance.c_str(), &d));
  DictPtr dict(d);
  check(polyg2p_dictionary_save(dict.get(), out.c_str()));
  const auto n = polyg2p_dictionary_size(dict.get());
  if (n == 0) std::cerr << "warning: no polyphonic characters found in " << raw << "\n";
  char* hist = nullptr;
  check(polyg2p_dictionary_histogram(dict.get(), &hist));
  std::cout << "entries: " << n << "\n";
  std::cout << "candidate histogram: " << take(hist) << "\n";
}

void run_predict(const Common& c, const std::string& sentence, long index, int max_new_tokens, bool verbose) {
  const auto selector = resolve_backend(c.backend);
  if (!selector) throw Failure{kExitUsage, "no backend: pass --backend or set POLYG2P_BACKEND_URL"};
  auto dict = open_dict(c.dict);
  auto catalog = open_catalog(c.templates);
  auto backend = open_backend(*selector, c.timeout_ms);
  const auto options = prompt_options(c);
  polyg2p_prediction p{};
  check(polyg2p_predict(dict.get(), catalog.get(), backend.get(), sentence.c_str(), index, &options, max_new_tokens,
                        &p));
  if (verbose) {
    std::cout << "--- prompt\n" << p.prompt << "\n--- generated\n" << p.generated << "\n---\n";
  }
  std::cout << (*p.pinyin ? p.pinyin : "?") << "\t" << p.provenance << "\n";
  polyg2p_prediction_free(&p);
}

void run_train_toy(const Common& c, const ToyFlags& t) {
  auto dict = open_dict(c.dict);
  auto catalog = open_catalog(c.templates);
  auto data = open_dataset(c);
  const auto dir = ensure_out(c.out);
  auto toy = t.o;
  toy.seed = c.seed;
  const auto options = prompt_options(c);
  char* log = nullptr;
  const auto ckpt = (dir / "toy.ckpt").string();
  check(polyg2p_train_toy(dict.get(), catalog.get(), data.get(), &options, &toy, c.ratio, ckpt.c_str(), on_epoch,
                          nullptr, &log));
  write_text(dir / "train_log.json", take(log) + "\n");
  std::cout << "checkpoint: " << ckpt << "\n";
}

void run_evaluate(const Common& c, const std::string& split, unsigned threads, int max_new_tokens) {
  auto data = open_dataset(c);
  const auto dir = ensure_out(c.out);
  polyg2p_eval_options eo;
  polyg2p_eval_options_default(&eo);
  eo.split = split == "dev" ? POLYG2P_SPLIT_DEV : POLYG2P_SPLIT_TEST;
  eo.threads = threads;
  eo.seed = c.seed;
  eo.max_new_tokens = max_new_tokens;
  polyg2p_reports* r = nullptr;
  const auto selector = resolve_backend(c.backend).value_or("majority");
  if (selector == "majority") {
    check(polyg2p_evaluate_majority(data.get(), &eo, &r));
  } else {
    if (c.dict.empty()) throw Failure{kExitUsage, "--dict is required for a generation backend"};
    auto dict = open_dict(c.dict);
    auto catalog = open_catalog(c.templates);
    auto backend = open_backend(selector, c.timeout_ms);
    const auto options = prompt_options(c);
    check(polyg2p_evaluate_pipeline(dict.get(), catalog.get(), backend.get(), data.get(), &options, &eo, &r));
  }
  ReportsPtr reports(r);
  write_reports(reports.get(), dir, "report");
}

void run_ablate(const Common& c, const ToyFlags& t, const std::vector<std::string>& styles,
                const std::vector<std::string>& knowledge, const std::vector<double>& ratios, unsigned threads) {
  auto dict = open_dict(c.dict);
  auto catalog = open_catalog(c.templates);
  auto data = open_dataset(c);
  const auto dir = ensure_out(c.out);
  BackendPtr backend;
  if (!c.backend.empty()) backend = open_backend(c.backend, c.timeout_ms);

  std::vector<polyg2p_style> s;
  for (const auto& x : styles) s.push_back(x == "completion" ? POLYG2P_STYLE_COMPLETION : POLYG2P_STYLE_CHOICE);
  std::vector<int> k;
  for (const auto& x : knowledge) k.push_back(x == "on");
  const polyg2p_grid grid{s.data(), s.size(), k.data(), k.size(), ratios.data(), ratios.size()};

  auto toy = t.o;
  toy.seed = c.seed;
  polyg2p_eval_options eo;
  polyg2p_eval_options_default(&eo);
  eo.threads = threads;
  eo.seed = c.seed;
  eo.max_new_tokens = toy.max_new_tokens;
  const auto base = prompt_options(c);
  polyg2p_reports* r = nullptr;
  check(polyg2p_ablate(dict.get(), catalog.get(), data.get(), &grid, backend.get(), &base, &toy, &eo, &r));
  ReportsPtr reports(r);
  write_reports(reports.get(), dir, "ablation");
}

void run_stats(const Common& c) {
  auto data = open_dataset(c);
  DictPtr dict;
  if (!c.dict.empty()) dict = open_dict(c.dict);
  char* json = nullptr;
  check(polyg2p_dataset_stats(data.get(), dict.get(), &json));
  std::cout << take(json) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mandarin polyphone disambiguation with dictionary-augmented prompts"};
  app.require_subcommand(1);
  app.set_version_flag("--version", polyg2p_version());

  Common c;
  ToyFlags toy;

  auto* build = app.add_subcommand("build-dict", "extract the polyphone dictionary from raw JSONL records");
  std::string raw, dict_out, provenance;
  build->add_option("--raw", raw, "raw dictionary records (JSONL)")->required()->check(CLI::ExistingFile);
  build->add_option("--out", dict_out, "output dictionary path")->required();
  build->add_option("--provenance", provenance, "provenance note stored in the dictionary");

  auto* predict = app.add_subcommand("predict", "predict the pinyin of one marked character");
  std::string sentence;
  long index = -1;
  bool verbose = false;
  int max_new_tokens = 8;
  predict->add_option("sentence", sentence, "sentence; mark the target with U+2582 unless --index is given")
      ->required();
  predict->add_option("--index", index, "code point index of the target in an unmarked sentence");
  add_dict(predict, c, true);
  add_prompt_flags(predict, c);
  predict->add_option("--backend", c.backend, "toy:<checkpoint> | remote:<url>; default $POLYG2P_BACKEND_URL");
  predict->add_option("--max-new-tokens", max_new_tokens, "answer token budget")->capture_default_str();
  predict->add_option("--timeout-ms", c.timeout_ms, "remote backend timeout")->capture_default_str();
  predict->add_flag("-v,--verbose", verbose, "also print the prompt and the raw generation");

  auto* train = app.add_subcommand("train-toy", "train the toy model and write <out>/toy.ckpt");
  add_dict(train, c, true);
  add_data(train, c);
  add_prompt_flags(train, c);
  train->add_option("--seed", c.seed, "seed for splitting, init and data order")->capture_default_str();
  train->add_option("--out", c.out, "output directory")->required();
  train->add_option("--ratio", c.ratio, "fraction of the train split to use")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  add_toy_flags(train, toy);

  auto* evaluate = app.add_subcommand("evaluate", "score a backend on a split; writes <out>/report.{jsonl,txt}");
  std::string split = "test";
  unsigned threads = 1;
  add_data(evaluate, c);
  add_dict(evaluate, c, false);
  add_prompt_flags(evaluate, c);
  evaluate->add_option("--backend", c.backend,
                       "majority | toy:<checkpoint> | remote:<url>; default $POLYG2P_BACKEND_URL, else majority");
  evaluate->add_option("--split", split, "split to score")->check(CLI::IsMember({"test", "dev"}))->capture_default_str();
  evaluate->add_option("--seed", c.seed, "seed for re-splitting")->capture_default_str();
  evaluate->add_option("--out", c.out, "output directory")->required();
  evaluate->add_option("--threads", threads, "evaluation threads")->capture_default_str();
  evaluate->add_option("--max-new-tokens", max_new_tokens, "answer token budget")->capture_default_str();
  evaluate->add_option("--timeout-ms", c.timeout_ms, "remote backend timeout")->capture_default_str();

  auto* ablate = app.add_subcommand("ablate", "style x knowledge x ratio grid; writes <out>/ablation.{jsonl,txt}");
  std::vector<std::string> styles = {"completion", "choice"};
  std::vector<std::string> knowledge = {"off", "on"};
  std::vector<double> ratios = {0.6, 0.8, 1.0};
  add_dict(ablate, c, true);
  add_data(ablate, c);
  ablate->add_option("--templates", c.templates, "template catalog, default built-in")->check(CLI::ExistingFile);
  ablate->add_option("--style", styles, "styles in the grid")
      ->delimiter(',')
      ->check(CLI::IsMember({"completion", "choice"}))
      ->capture_default_str();
  ablate->add_option("--knowledge", knowledge, "knowledge settings in the grid")
      ->delimiter(',')
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  ablate->add_option("--ratio", ratios, "train ratios in the grid")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  ablate->add_option("--backend", c.backend, "remote:<url> to score a fixed model; default trains a toy model per row");
  ablate->add_option("--seed", c.seed, "seed for splitting, subsetting and training")->capture_default_str();
  ablate->add_option("--out", c.out, "output directory")->required();
  ablate->add_option("--threads", threads, "evaluation threads")->capture_default_str();
  ablate->add_option("--timeout-ms", c.timeout_ms, "remote backend timeout")->capture_default_str();
  add_toy_flags(ablate, toy);

  auto* stats = app.add_subcommand("stats", "dataset statistics as JSON");
  add_data(stats, c);
  add_dict(stats, c, false);
  stats->add_option("--seed", c.seed, "seed for re-splitting")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*build) run_build_dict(raw, dict_out, provenance);
    if (*predict) run_predict(c, sentence, index, max_new_tokens, verbose);
    if (*train) run_train_toy(c, toy);
    if (*evaluate) run_evaluate(c, split, threads, max_new_tokens);
    if (*ablate) run_ablate(c, toy, styles, knowledge, ratios, threads);
    if (*stats) run_stats(c);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.code;
  }
  return 0;
}
