#pragma once

// Independent reference implementations used as test oracles. They are
// deliberately naive and share no code with the library.

#include <cstddef>
#include <string>
#include <vector>

#include "generation/model.hpp"
#include "pinyin.hpp"

namespace polyg2p::testing {

// Textbook recursive Levenshtein; exponential, fine for length <= 6.
std::size_t naive_levenshtein(const std::u32string& a, const std::u32string& b);

// The same recurrence, top-down with a memo table, for lengths where the
// plain recursion is too slow.
std::size_t memo_levenshtein(const std::u32string& a, const std::u32string& b);

// Same distance by full-matrix DP, for the longer random pairs.
std::size_t matrix_levenshtein(const std::u32string& a, const std::u32string& b);

// Index of the first candidate at minimum distance from `answer`.
std::size_t brute_force_choice(const std::string& answer, const std::vector<PinyinSyllable>& candidates);

// pos1/pos2 straight from the rule: context i -> (i, 0), answer j -> (mask, j + 1).
std::vector<PositionPair> closed_form_positions(int context_len, int mask_index, int span_len);

}  // namespace polyg2p::testing
