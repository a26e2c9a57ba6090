#include "postprocess.hpp"

#include <limits>

#include "error.hpp"
#include "utf8.hpp"

namespace polyg2p {

namespace {

bool is_strippable(char32_t c) {
  if (c < 0x80) {
    return c <= 0x20 || c == 0x7F || (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
           (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
  }
  switch (c) {
    case 0x00A0:  // no-break space
    case 0x3000:  // ideographic space
    case 0x3001:  // 、
    case 0x3002:  // 。
    case 0x300A: case 0x300B:  // 《》
    case 0x300C: case 0x300D:  // 「」
    case 0x201C: case 0x201D:  // “”
    case 0x2018: case 0x2019:  // ‘’
    case 0x2026:  // …
    case 0xFF01:  // ！
    case 0xFF08: case 0xFF09:  // （）
    case 0xFF0C:  // ，
    case 0xFF1A:  // ：
    case 0xFF1B:  // ；
    case 0xFF1F:  // ？
      return true;
    default:
      return false;
  }
}

bool is_lower(char32_t c) { return c >= U'a' && c <= U'z'; }
bool is_tone(char32_t c) { return c >= U'1' && c <= U'5'; }

}  // namespace

std::string extract_answer(std::string_view generated) {
  const auto cps = utf8::decode(generated);
  std::size_t begin = 0;
  std::size_t end = cps.size();
  while (begin < end && is_strippable(cps[begin])) ++begin;
  while (end > begin && is_strippable(cps[end - 1])) --end;
  const std::u32string_view stripped(cps.data() + begin, end - begin);

  // A run of letters is maximal when it starts after a non-letter.
  for (std::size_t i = 0; i < stripped.size(); ++i) {
    if (!is_lower(stripped[i]) || (i > 0 && is_lower(stripped[i - 1]))) continue;
    std::size_t j = i;
    while (j < stripped.size() && is_lower(stripped[j])) ++j;
    if (j < stripped.size() && is_tone(stripped[j])) {
      return utf8::encode(stripped.substr(i, j - i + 1));
    }
    i = j - 1;
  }
  return utf8::encode(stripped);
}

CorrectionOutcome correct(std::string_view generated, std::span<const PinyinSyllable> candidates) {
  if (candidates.empty()) throw Error(ErrorKind::EmptyCandidateList, "no candidates to correct against");
  const std::string answer = extract_answer(generated);
  for (const auto& c : candidates) {
    if (c.text() == answer) return CorrectionOutcome{c, true, 0, false};
  }
  std::size_t best = 0;
  std::size_t best_distance = std::numeric_limits<std::size_t>::max();
  std::size_t ties = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const std::size_t d = edit_distance(answer, candidates[i].text());
    if (d < best_distance) {
      best = i;
      best_distance = d;
      ties = 1;
    } else if (d == best_distance) {
      ++ties;
    }
  }
  return CorrectionOutcome{candidates[best], false, best_distance, ties > 1};
}

}  // namespace polyg2p
