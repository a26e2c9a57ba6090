#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pinyin.hpp"
#include "text_template.hpp"

namespace polyg2p {

// One pronunciation of a polyphonic character with its glosses.
struct Sense {
  PinyinSyllable pinyin;
  std::vector<std::string> pos_tags;
  std::vector<std::string> definitions;
  std::vector<std::string> phrases;
  int freq_rank = 0;
};

// A polyphonic character. `senses` is sorted by freq_rank, ranks are 0..k-1,
// k >= 2 and all pinyin are distinct.
struct CharacterEntry {
  char32_t character = 0;
  std::vector<Sense> senses;
};

// Immutable after construction; safe for concurrent readers.
class Dictionary {
 public:
  Dictionary() = default;
  // Validates every entry; throws Error(Schema) on a violated invariant.
  Dictionary(std::vector<CharacterEntry> entries, std::string provenance);

  const CharacterEntry* find(char32_t character) const;
  const CharacterEntry* find(std::string_view utf8_character) const;
  std::size_t entry_count() const noexcept { return entries_.size(); }
  const std::string& provenance() const noexcept { return provenance_; }

  // Ordered by code point.
  const std::map<char32_t, CharacterEntry>& entries() const noexcept { return entries_; }

 private:
  std::map<char32_t, CharacterEntry> entries_;
  std::string provenance_;
};

// One row of a raw dictionary dump, before polyphone extraction.
struct RawRecord {
  std::string character;
  std::string pinyin;
  std::vector<std::string> pos_tags;
  std::vector<std::string> definitions;
  std::vector<std::string> phrases;
  long long frequency_count = 0;
};

Dictionary load_dictionary(const std::filesystem::path& path);
Dictionary parse_dictionary(std::istream& in);

// Canonical serialization: entries by code point, senses by freq_rank.
std::string serialize_dictionary(const Dictionary& dict);
void save_dictionary(const Dictionary& dict, const std::filesystem::path& path);

std::vector<RawRecord> load_raw_records(const std::filesystem::path& path);
std::vector<RawRecord> parse_raw_records(std::istream& in);

// Groups raw rows per character, merges repeated (character, pinyin) rows,
// drops monophonic characters and ranks senses by descending count (ties by
// first appearance).
Dictionary build_dictionary(const std::vector<RawRecord>& records, std::string provenance = {});

std::vector<PinyinSyllable> candidates(const Dictionary& dict, std::string_view character);

struct KnowledgeLimits {
  int max_definitions = 3;
  int max_phrases = 3;
};

// Layout of the knowledge block: an optional header line followed by one
// compact-rendered line per sense. Slots: {pinyin} {pos} {definitions} {phrases}.
struct KnowledgeLayout {
  std::string header;
  TextTemplate line{"{pinyin}: {pos}; {definitions}; {phrases}"};
  std::string list_separator = "/";
};

std::string knowledge_block(const Dictionary& dict, std::string_view character,
                            const KnowledgeLimits& limits,
                            const KnowledgeLayout& layout = KnowledgeLayout{});

}  // namespace polyg2p
