#include "oracles.hpp"

#include <algorithm>

namespace polyg2p::testing {

namespace {

std::size_t rec(const std::u32string& a, std::size_t i, const std::u32string& b, std::size_t j) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  if (a[i] == b[j]) return rec(a, i + 1, b, j + 1);
  return 1 + std::min({rec(a, i + 1, b, j), rec(a, i, b, j + 1), rec(a, i + 1, b, j + 1)});
}

std::size_t memo_rec(const std::u32string& a, std::size_t i, const std::u32string& b, std::size_t j,
                     std::vector<std::vector<std::size_t>>& memo) {
  auto& slot = memo[i][j];
  if (slot != static_cast<std::size_t>(-1)) return slot;
  if (i == a.size()) return slot = b.size() - j;
  if (j == b.size()) return slot = a.size() - i;
  if (a[i] == b[j]) return slot = memo_rec(a, i + 1, b, j + 1, memo);
  return slot = 1 + std::min({memo_rec(a, i + 1, b, j, memo), memo_rec(a, i, b, j + 1, memo),
                              memo_rec(a, i + 1, b, j + 1, memo)});
}

// Minimal decoder for well-formed UTF-8 test strings.
std::u32string widen(const std::string& text) {
  std::u32string out;
  for (std::size_t i = 0; i < text.size();) {
    const auto c = static_cast<unsigned char>(text[i]);
    const int n = c < 0x80 ? 1 : c < 0xE0 ? 2 : c < 0xF0 ? 3 : 4;
    char32_t cp = n == 1 ? c : c & (0x7F >> n);
    for (int k = 1; k < n; ++k) cp = (cp << 6) | (static_cast<unsigned char>(text[i + k]) & 0x3F);
    out.push_back(cp);
    i += n;
  }
  return out;
}

}  // namespace

std::size_t naive_levenshtein(const std::u32string& a, const std::u32string& b) { return rec(a, 0, b, 0); }

std::size_t memo_levenshtein(const std::u32string& a, const std::u32string& b) {
  std::vector<std::vector<std::size_t>> memo(a.size() + 1, std::vector<std::size_t>(b.size() + 1, static_cast<std::size_t>(-1)));
  return memo_rec(a, 0, b, 0, memo);
}

std::size_t matrix_levenshtein(const std::u32string& a, const std::u32string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, sub});
    }
  }
  return d[a.size()][b.size()];
}

std::size_t brute_force_choice(const std::string& answer, const std::vector<PinyinSyllable>& candidates) {
  std::size_t best = 0;
  std::size_t best_d = static_cast<std::size_t>(-1);
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const auto d = matrix_levenshtein(widen(answer), widen(candidates[k].text()));
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

std::vector<PositionPair> closed_form_positions(int context_len, int mask_index, int span_len) {
  std::vector<PositionPair> out;
  for (int i = 0; i < context_len; ++i) out.push_back({i, 0});
  for (int j = 0; j < span_len; ++j) out.push_back({mask_index, j + 1});
  return out;
}

}  // namespace polyg2p::testing
