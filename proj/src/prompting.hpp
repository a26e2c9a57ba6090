#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dictionary.hpp"
#include "pinyin.hpp"
#include "text_template.hpp"

namespace polyg2p {

// U+2582 LOWER ONE QUARTER BLOCK, the delimiter placed around the target.
inline constexpr std::string_view kTargetMarker = "\xE2\x96\x82";
inline constexpr char32_t kTargetMarkerCp = 0x2582;

// A sentence with one polyphonic character to disambiguate.
struct Sample {
  std::string sentence;  // UTF-8, without markers
  std::size_t target_index = 0;  // code point offset of the target
  char32_t target_char = 0;
  std::optional<PinyinSyllable> gold;

  // Builds a sample and fills target_char; throws Error(IndexOutOfRange).
  static Sample at(std::string sentence, std::size_t target_index,
                   std::optional<PinyinSyllable> gold = std::nullopt);
  std::string target_utf8() const;
};

// Returns the sentence with the marker inserted before and after the target.
std::string mark_target(const Sample& sample);

// Parses a sentence carrying exactly two markers around one character.
// Throws Error(Format) otherwise.
Sample sample_from_marked(std::string_view marked, std::optional<PinyinSyllable> gold = std::nullopt);

enum class Style { Completion, MultipleChoice };

std::string_view style_name(Style style);  // "completion" | "choice"
Style parse_style(std::string_view name);

struct PromptStyle {
  Style style = Style::MultipleChoice;
  bool include_knowledge = true;
  // Completion variant that still names the candidates in the prompt.
  bool name_candidates = false;

  std::string label() const;
};

struct Prompt {
  std::string text;
  PromptStyle style;
  std::vector<PinyinSyllable> candidate_order;
  std::string marked_sentence;
};

// Named templates loaded from a catalog file:
//
//   @version <n>
//   @template <name>
//   ...body lines...
//   @end
//
// Lines outside template blocks starting with '#' are comments. The body is
// the exact lines between the markers joined by '\n'.
class TemplateCatalog {
 public:
  static TemplateCatalog builtin();
  static TemplateCatalog load(const std::filesystem::path& path);
  static TemplateCatalog parse(std::string_view text);

  int version() const noexcept { return version_; }
  const TextTemplate& get(std::string_view name) const;
  KnowledgeLayout knowledge_layout() const;

 private:
  int version_ = 0;
  std::map<std::string, TextTemplate, std::less<>> templates_;
};

// Source text of the built-in catalog (identical to assets/templates.txt).
std::string_view builtin_catalog_text();

Prompt build_prompt(const Sample& sample, const Dictionary& dict, const PromptStyle& style,
                    const KnowledgeLimits& limits = KnowledgeLimits{},
                    const TemplateCatalog& catalog = TemplateCatalog::builtin());

}  // namespace polyg2p
