#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "pinyin.hpp"

namespace polyg2p {

struct CorrectionOutcome {
  PinyinSyllable final_pinyin;
  bool was_valid = false;  // generated answer already matched a candidate
  std::size_t distance = 0;
  bool tie_broken = false;  // several candidates shared the minimum distance
};

// Trims whitespace and punctuation, then returns the first maximal
// `[a-z]+[1-5]` substring, or the trimmed text when there is none.
std::string extract_answer(std::string_view generated);

// Maps generated text onto the candidate list (which must be in frequency
// order). Exact matches pass through; otherwise the first candidate at the
// minimum edit distance wins. Throws Error(EmptyCandidateList).
CorrectionOutcome correct(std::string_view generated, std::span<const PinyinSyllable> candidates);

}  // namespace polyg2p
