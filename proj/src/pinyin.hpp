#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>

namespace polyg2p {

// A toned romanized syllable such as "hong2". Tone 5 is the neutral tone.
// Any `[a-z]+[1-5]` string is accepted; legality against a syllable table is
// the dictionary's concern.
class PinyinSyllable {
 public:
  // Throws Error(MalformedPinyin) unless `base` is non-empty lowercase ASCII
  // and `tone` is in 1..5.
  PinyinSyllable(std::string base, int tone);

  const std::string& base() const noexcept { return base_; }
  int tone() const noexcept { return tone_; }

  // Canonical text form: base immediately followed by the tone digit.
  std::string text() const;

  friend bool operator==(const PinyinSyllable&, const PinyinSyllable&) = default;
  // Orders by canonical text, which is what tie-breaking rules compare.
  friend std::strong_ordering operator<=>(const PinyinSyllable& a, const PinyinSyllable& b) {
    return a.text() <=> b.text();
  }

 private:
  std::string base_;
  int tone_;
};

PinyinSyllable parse_pinyin(std::string_view text);

// True iff `text` matches `[a-z]+[1-5]` exactly.
bool is_pinyin(std::string_view text) noexcept;

// Unit-cost Levenshtein distance over Unicode scalar values.
std::size_t edit_distance(std::string_view a, std::string_view b);
std::size_t edit_distance(std::u32string_view a, std::u32string_view b);

}  // namespace polyg2p
