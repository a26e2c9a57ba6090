#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace polyg2p {

// Character-level vocabulary: one id per Unicode scalar value, after a fixed
// block of special tokens.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;
  static constexpr int kMask = 4;
  static constexpr int kNumSpecials = 5;

  Vocabulary() = default;
  // Symbols are sorted by code point so the id assignment does not depend on
  // corpus order.
  static Vocabulary build(std::span<const std::string> corpus);
  static Vocabulary from_symbols(std::vector<char32_t> symbols);

  int size() const noexcept { return kNumSpecials + static_cast<int>(symbols_.size()); }
  const std::vector<char32_t>& symbols() const noexcept { return symbols_; }

  int id_of(char32_t cp) const;  // kUnk when absent
  static bool is_special(int id) noexcept { return id >= 0 && id < kNumSpecials; }

  std::vector<int> tokenize(std::string_view text) const;
  // Specials render as nothing, except UNK which renders as U+FFFD.
  std::string detokenize(std::span<const int> ids) const;

 private:
  std::vector<char32_t> symbols_;
  std::map<char32_t, int> index_;
};

}  // namespace polyg2p
