#include "dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "error.hpp"
#include "random.hpp"
#include "utf8.hpp"

namespace polyg2p {

namespace {

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

Sample parse_row(const std::string& marked, const std::string& label, std::size_t line_no,
                 const CppLoadOptions& options) {
  const std::string pinyin = trim(label);
  if (!is_pinyin(pinyin)) {
    throw LineError(ErrorKind::MalformedPinyin, line_no, "'" + pinyin + "' does not match [a-z]+[1-5]");
  }
  Sample s;
  try {
    s = sample_from_marked(marked, parse_pinyin(pinyin));
  } catch (const Error& e) {
    throw LineError(ErrorKind::Format, line_no, e.what());
  }
  if (options.enforce_length) {
    const auto len = utf8::length(s.sentence);
    if (len < 5 || len > 50) {
      throw LineError(ErrorKind::Format, line_no, "sentence length " + std::to_string(len) + " outside 5..50");
    }
  }
  return s;
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return in;
}

}  // namespace

std::vector<Sample> load_cpp_tsv(const std::filesystem::path& path, const CppLoadOptions& options) {
  auto in = open(path);
  std::vector<Sample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(std::move(line));
    if (trim(line).empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw LineError(ErrorKind::Format, line_no, "expected sentence<TAB>pinyin");
    out.push_back(parse_row(line.substr(0, tab), line.substr(tab + 1), line_no, options));
  }
  return out;
}

std::vector<Sample> load_cpp_pair(const std::filesystem::path& sent_path, const std::filesystem::path& label_path,
                                  const CppLoadOptions& options) {
  auto sents = open(sent_path);
  auto labels = open(label_path);
  std::vector<Sample> out;
  std::string sent, label;
  std::size_t line_no = 0;
  while (true) {
    const bool has_sent = static_cast<bool>(std::getline(sents, sent));
    const bool has_label = static_cast<bool>(std::getline(labels, label));
    if (!has_sent && !has_label) break;
    ++line_no;
    if (has_sent != has_label) {
      throw LineError(ErrorKind::Format, line_no, sent_path.filename().string() + " and " +
                                                      label_path.filename().string() + " differ in length");
    }
    sent = strip_cr(std::move(sent));
    label = strip_cr(std::move(label));
    if (trim(sent).empty() && trim(label).empty()) continue;
    out.push_back(parse_row(sent, label, line_no, options));
  }
  return out;
}

std::vector<Sample> load_cpp(const std::filesystem::path& path, const CppLoadOptions& options) {
  if (path.extension() == ".sent") {
    auto label = path;
    label.replace_extension(".lb");
    return load_cpp_pair(path, label, options);
  }
  return load_cpp_tsv(path, options);
}

std::array<std::size_t, 3> split_sizes(std::size_t n, std::array<int, 3> ratios) {
  long long total = 0;
  for (int r : ratios) {
    if (r <= 0) throw Error(ErrorKind::InvalidArgument, "split ratios must be positive");
    total += r;
  }
  std::array<std::size_t, 3> sizes{};
  std::array<long long, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto scaled = static_cast<long long>(n) * ratios[i];
    sizes[i] = static_cast<std::size_t>(scaled / total);
    remainder[i] = scaled % total;
    assigned += sizes[i];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++sizes[order[k % 3]];
  return sizes;
}

DatasetSplit split_dataset(std::vector<Sample> samples, std::array<int, 3> ratios, std::uint64_t seed) {
  const auto sizes = split_sizes(samples.size(), ratios);
  Rng rng(seed);
  rng.shuffle(std::span<Sample>(samples));
  DatasetSplit split;
  split.source = "resplit";
  auto it = samples.begin();
  auto take = [&](std::vector<Sample>& dst, std::size_t count) {
    dst.assign(std::make_move_iterator(it), std::make_move_iterator(it + static_cast<std::ptrdiff_t>(count)));
    it += static_cast<std::ptrdiff_t>(count);
  };
  take(split.train, sizes[0]);
  take(split.dev, sizes[1]);
  take(split.test, sizes[2]);
  return split;
}

DatasetSplit load_dataset(const std::filesystem::path& path, std::uint64_t seed, const CppLoadOptions& options) {
  namespace fs = std::filesystem;
  if (fs::is_directory(path)) {
    DatasetSplit split;
    split.source = "published";
    auto load_part = [&](const char* name, bool required) -> std::vector<Sample> {
      const auto sent = path / (std::string(name) + ".sent");
      const auto tsv = path / (std::string(name) + ".tsv");
      if (fs::exists(sent)) return load_cpp_pair(sent, path / (std::string(name) + ".lb"), options);
      if (fs::exists(tsv)) return load_cpp_tsv(tsv, options);
      if (required) {
        throw Error(ErrorKind::Io, path.string() + " has neither " + name + ".sent/.lb nor " + name + ".tsv");
      }
      return {};
    };
    split.train = load_part("train", true);
    split.dev = load_part("dev", false);
    split.test = load_part("test", true);
    return split;
  }
  if (!fs::exists(path)) throw Error(ErrorKind::Io, path.string() + " does not exist");
  return split_dataset(load_cpp(path, options), {8, 1, 1}, seed);
}

DatasetStats dataset_stats(std::span<const Sample> samples, const Dictionary* dict) {
  std::map<char32_t, std::set<std::string>> seen;
  for (const auto& s : samples) {
    auto& labels = seen[s.target_char];
    if (s.gold) labels.insert(s.gold->text());
  }
  DatasetStats stats;
  stats.n_samples = samples.size();
  stats.n_characters = seen.size();
  for (const auto& [cp, labels] : seen) {
    std::size_t count = labels.size();
    if (dict) {
      if (const auto* entry = dict->find(cp)) count = entry->senses.size();
    }
    ++stats.candidate_histogram[count];
    if (count == 2) ++stats.n_two_candidates;
  }
  stats.two_candidate_fraction =
      stats.n_characters == 0 ? 0.0 : static_cast<double>(stats.n_two_candidates) / static_cast<double>(stats.n_characters);
  return stats;
}

}  // namespace polyg2p
