#include "pinyin.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "error.hpp"
#include "utf8.hpp"

namespace polyg2p {

namespace {

bool valid_base(std::string_view base) {
  return !base.empty() &&
         std::all_of(base.begin(), base.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

}  // namespace

PinyinSyllable::PinyinSyllable(std::string base, int tone) : base_(std::move(base)), tone_(tone) {
  if (!valid_base(base_)) {
    throw Error(ErrorKind::MalformedPinyin, "base must be non-empty [a-z]+, got '" + base_ + "'");
  }
  if (tone_ < 1 || tone_ > 5) {
    throw Error(ErrorKind::MalformedPinyin, "tone must be in 1..5, got " + std::to_string(tone_));
  }
}

std::string PinyinSyllable::text() const { return base_ + static_cast<char>('0' + tone_); }

bool is_pinyin(std::string_view text) noexcept {
  if (text.size() < 2) return false;
  const char last = text.back();
  return last >= '1' && last <= '5' && valid_base(text.substr(0, text.size() - 1));
}

PinyinSyllable parse_pinyin(std::string_view text) {
  if (!is_pinyin(text)) {
    throw Error(ErrorKind::MalformedPinyin, "'" + std::string(text) + "' does not match [a-z]+[1-5]");
  }
  return PinyinSyllable(std::string(text.substr(0, text.size() - 1)), text.back() - '0');
}

std::size_t edit_distance(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  // single row over the shorter string
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t subst = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({up + 1, row[j - 1] + 1, subst});
      diag = up;
    }
  }
  return row[b.size()];
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  return edit_distance(utf8::decode(a), utf8::decode(b));
}

}  // namespace polyg2p
