#include "eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "error.hpp"
#include "random.hpp"
#include "utf8.hpp"

namespace polyg2p {

MajorityModel train_majority(std::span<const Sample> train) {
  if (train.empty()) throw Error(ErrorKind::EmptyDataset, "majority vote needs at least one training sample");
  std::map<char32_t, std::map<std::string, std::size_t>> counts;
  std::map<std::string, std::size_t> global;
  for (const auto& s : train) {
    if (!s.gold) throw Error(ErrorKind::InvalidArgument, "training sample without a gold label");
    const auto text = s.gold->text();
    ++counts[s.target_char][text];
    ++global[text];
  }
  // std::map iterates in text order, so keeping the first strict maximum
  // breaks ties toward the smaller text.
  auto argmax = [](const std::map<std::string, std::size_t>& c) {
    auto best = c.begin();
    for (auto it = c.begin(); it != c.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    return parse_pinyin(best->first);
  };
  MajorityModel model{{}, argmax(global)};
  for (const auto& [cp, c] : counts) model.table.emplace(cp, argmax(c));
  return model;
}

PinyinSyllable predict_majority(const MajorityModel& model, const Sample& sample) {
  const auto it = model.table.find(sample.target_char);
  return it == model.table.end() ? model.fallback : it->second;
}

EvalReport evaluate(const Predictor& predictor, std::span<const Sample> samples, std::string condition, RunInfo run,
                    unsigned threads) {
  const auto start = std::chrono::steady_clock::now();
  for (const auto& s : samples) {
    if (!s.gold) throw Error(ErrorKind::InvalidArgument, "evaluation sample without a gold label");
  }
  std::vector<Prediction> predictions(samples.size());
  std::vector<std::exception_ptr> fatal(std::max(1u, threads));
  auto work = [&](unsigned worker, unsigned stride) {
    try {
      for (std::size_t i = worker; i < samples.size(); i += stride) {
        try {
          predictions[i] = predictor.predict(samples[i]);
        } catch (const Error& e) {
          if (e.kind() == ErrorKind::BackendUnavailable) throw;
          predictions[i] = Prediction{std::nullopt, true, false};
        }
      }
    } catch (...) {
      fatal[worker] = std::current_exception();
    }
  };
  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : fatal) {
    if (e) std::rethrow_exception(e);
  }

  EvalReport report;
  report.condition = std::move(condition);
  report.run = std::move(run);
  report.n_samples = samples.size();
  std::size_t invalid = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& p = predictions[i];
    const bool ok = p.pinyin && *p.pinyin == *samples[i].gold;
    auto& score = report.per_character[samples[i].target_char];
    ++score.n;
    if (ok) {
      ++score.correct;
      ++report.n_correct;
    }
    if (p.generated && !p.valid_generation) ++invalid;
  }
  if (report.n_samples > 0) {
    const auto n = static_cast<double>(report.n_samples);
    report.accuracy = static_cast<double>(report.n_correct) / n;
    report.invalid_generation_rate = static_cast<double>(invalid) / n;
  }
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

namespace {

nlohmann::ordered_json to_json(const EvalReport& r, bool include_timing) {
  nlohmann::ordered_json j;
  j["condition"] = r.condition;
  j["config"] = {{"style", r.run.style},
                 {"knowledge", r.run.knowledge},
                 {"train_ratio", r.run.train_ratio},
                 {"seed", r.run.seed},
                 {"backend", r.run.backend},
                 {"split", r.run.split_source},
                 {"n_train", r.run.n_train}};
  j["n_samples"] = r.n_samples;
  j["n_correct"] = r.n_correct;
  j["accuracy"] = r.accuracy;
  j["invalid_generation_rate"] = r.invalid_generation_rate;
  auto per = nlohmann::ordered_json::array();
  for (const auto& [cp, s] : r.per_character) {
    per.push_back({{"char", utf8::encode(cp)}, {"n", s.n}, {"correct", s.correct}});
  }
  j["per_character"] = per;
  if (include_timing) j["wall_clock_seconds"] = r.wall_clock_seconds;
  return j;
}

}  // namespace

std::string report_to_json_line(const EvalReport& report, bool include_timing) {
  return to_json(report, include_timing).dump();
}

void write_reports_jsonl(std::span<const EvalReport> reports, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  for (const auto& r : reports) out << report_to_json_line(r) << '\n';
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

std::vector<EvalReport> read_reports_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::vector<EvalReport> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      EvalReport r;
      r.condition = j.at("condition").get<std::string>();
      const auto& c = j.at("config");
      r.run.style = c.at("style").get<std::string>();
      r.run.knowledge = c.at("knowledge").get<std::string>();
      r.run.train_ratio = c.at("train_ratio").get<double>();
      r.run.seed = c.at("seed").get<std::uint64_t>();
      r.run.backend = c.at("backend").get<std::string>();
      r.run.split_source = c.at("split").get<std::string>();
      r.run.n_train = c.at("n_train").get<std::size_t>();
      r.n_samples = j.at("n_samples").get<std::size_t>();
      r.n_correct = j.at("n_correct").get<std::size_t>();
      r.accuracy = j.at("accuracy").get<double>();
      r.invalid_generation_rate = j.at("invalid_generation_rate").get<double>();
      for (const auto& p : j.at("per_character")) {
        const auto cps = utf8::decode(p.at("char").get<std::string>());
        if (cps.size() != 1) throw Error(ErrorKind::Schema, "per_character key must be one character");
        r.per_character[cps[0]] = {p.at("n").get<std::size_t>(), p.at("correct").get<std::size_t>()};
      }
      r.wall_clock_seconds = j.value("wall_clock_seconds", 0.0);
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw LineError(ErrorKind::Schema, line_no, e.what());
    } catch (const LineError&) {
      throw;
    } catch (const Error& e) {
      throw LineError(e.kind(), line_no, e.what());
    }
  }
  return out;
}

std::string format_report_table(std::span<const EvalReport> reports) {
  const std::vector<std::string> head = {"condition", "style", "knowledge", "ratio", "n_train",
                                         "n_test",    "accuracy", "invalid", "backend"};
  std::vector<std::vector<std::string>> rows;
  auto fixed = [](double v, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
  };
  for (const auto& r : reports) {
    rows.push_back({r.condition, r.run.style, r.run.knowledge, fixed(r.run.train_ratio, 2),
                    std::to_string(r.run.n_train), std::to_string(r.n_samples), fixed(100.0 * r.accuracy, 2) + "%",
                    fixed(100.0 * r.invalid_generation_rate, 2) + "%", r.run.backend});
  }
  std::vector<std::size_t> width(head.size());
  for (std::size_t c = 0; c < head.size(); ++c) {
    width[c] = head[c].size();
    for (const auto& row : rows) width[c] = std::max(width[c], utf8::length(row[c]));
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << row[c];
      if (c + 1 < row.size()) out << std::string(width[c] - utf8::length(row[c]) + 2, ' ');
    }
    out << '\n';
  };
  emit(head);
  std::vector<std::string> rule;
  for (auto w : width) rule.emplace_back(w, '-');
  emit(rule);
  for (const auto& row : rows) emit(row);
  return out.str();
}

std::string AblationCondition::label() const {
  std::ostringstream s;
  s << style.label() << '@' << train_ratio;
  return s.str();
}

std::vector<AblationCondition> AblationGrid::conditions() const {
  std::vector<AblationCondition> out;
  for (Style st : styles) {
    for (bool k : knowledge) {
      for (double r : ratios) {
        AblationCondition c;
        c.style.style = st;
        c.style.include_knowledge = k;
        c.train_ratio = r;
        out.push_back(c);
      }
    }
  }
  return out;
}

std::vector<Sample> train_subset(std::span<const Sample> train, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw Error(ErrorKind::InvalidArgument, "train ratio must be in (0, 1]");
  std::vector<Sample> shuffled(train.begin(), train.end());
  Rng rng(seed);
  rng.shuffle(std::span<Sample>(shuffled));
  // The epsilon keeps 0.6 * 100 from landing on 59.
  const auto keep = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(train.size()) + 1e-9));
  shuffled.resize(std::min(keep, shuffled.size()));
  return shuffled;
}

std::vector<EvalReport> run_ablation(const AblationGrid& grid, const DatasetSplit& split,
                                     const PipelineFactory& factory, std::uint64_t seed, unsigned threads) {
  const auto conditions = grid.conditions();
  if (conditions.empty()) throw Error(ErrorKind::InvalidArgument, "ablation grid is empty");
  std::vector<EvalReport> reports;
  for (const auto& c : conditions) {
    const auto subset = train_subset(split.train, c.train_ratio, seed);
    const auto predictor = factory(c, subset);
    RunInfo run;
    run.style = std::string(style_name(c.style.style));
    run.knowledge = c.style.include_knowledge ? "on" : "off";
    run.train_ratio = c.train_ratio;
    run.seed = seed;
    run.backend = predictor->id();
    run.split_source = split.source;
    run.n_train = subset.size();
    reports.push_back(evaluate(*predictor, split.test, c.label(), std::move(run), threads));
  }
  return reports;
}

}  // namespace polyg2p
