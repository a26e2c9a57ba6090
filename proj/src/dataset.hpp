#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dictionary.hpp"
#include "prompting.hpp"

namespace polyg2p {

struct CppLoadOptions {
  // CPP sentences are 5..50 characters long; rows outside that range are
  // rejected unless this is off.
  bool enforce_length = true;
};

// Layout A: one `marked_sentence<TAB>pinyin` row per line.
std::vector<Sample> load_cpp_tsv(const std::filesystem::path& path, const CppLoadOptions& options = {});
// Layout B: line-aligned `<split>.sent` (marked) and `<split>.lb` (pinyin).
std::vector<Sample> load_cpp_pair(const std::filesystem::path& sent_path, const std::filesystem::path& label_path,
                                  const CppLoadOptions& options = {});
// Picks the layout from the extension: `.sent` pairs with the sibling `.lb`,
// anything else is read as TSV.
std::vector<Sample> load_cpp(const std::filesystem::path& path, const CppLoadOptions& options = {});

struct DatasetSplit {
  std::vector<Sample> train;
  std::vector<Sample> dev;
  std::vector<Sample> test;
  std::string source;  // "published" or "resplit"
};

// Seeded shuffle, then contiguous partition with largest-remainder rounding
// (ties go to the earlier part).
DatasetSplit split_dataset(std::vector<Sample> samples, std::array<int, 3> ratios = {8, 1, 1},
                           std::uint64_t seed = 0);

// Part sizes used by split_dataset.
std::array<std::size_t, 3> split_sizes(std::size_t n, std::array<int, 3> ratios);

// A directory holding train/dev/test in either layout is loaded verbatim
// (dev optional); a single file is loaded and re-split with `seed`.
DatasetSplit load_dataset(const std::filesystem::path& path, std::uint64_t seed, const CppLoadOptions& options = {});

struct DatasetStats {
  std::size_t n_samples = 0;
  std::size_t n_characters = 0;  // distinct target characters
  std::size_t n_two_candidates = 0;
  double two_candidate_fraction = 0.0;
  std::map<std::size_t, std::size_t> candidate_histogram;  // #candidates -> #characters
};

// Candidate counts come from the dictionary when it knows the character and
// from the distinct gold labels seen in `samples` otherwise.
DatasetStats dataset_stats(std::span<const Sample> samples, const Dictionary* dict = nullptr);

}  // namespace polyg2p
