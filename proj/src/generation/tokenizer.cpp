#include "generation/tokenizer.hpp"

#include <algorithm>
#include <set>

#include "error.hpp"
#include "utf8.hpp"

namespace polyg2p {

Vocabulary Vocabulary::build(std::span<const std::string> corpus) {
  std::set<char32_t> seen;
  for (const auto& text : corpus) {
    for (char32_t cp : utf8::decode(text)) seen.insert(cp);
  }
  return from_symbols({seen.begin(), seen.end()});
}

Vocabulary Vocabulary::from_symbols(std::vector<char32_t> symbols) {
  Vocabulary v;
  std::sort(symbols.begin(), symbols.end());
  symbols.erase(std::unique(symbols.begin(), symbols.end()), symbols.end());
  v.symbols_ = std::move(symbols);
  for (std::size_t i = 0; i < v.symbols_.size(); ++i) {
    v.index_.emplace(v.symbols_[i], kNumSpecials + static_cast<int>(i));
  }
  return v;
}

int Vocabulary::id_of(char32_t cp) const {
  const auto it = index_.find(cp);
  return it == index_.end() ? kUnk : it->second;
}

std::vector<int> Vocabulary::tokenize(std::string_view text) const {
  std::vector<int> ids;
  for (char32_t cp : utf8::decode(text)) ids.push_back(id_of(cp));
  return ids;
}

std::string Vocabulary::detokenize(std::span<const int> ids) const {
  std::u32string out;
  for (int id : ids) {
    if (id == kUnk) {
      out.push_back(0xFFFD);
    } else if (id >= kNumSpecials && id < size()) {
      out.push_back(symbols_[static_cast<std::size_t>(id - kNumSpecials)]);
    } else if (!is_special(id)) {
      throw Error(ErrorKind::InvalidArgument, "token id " + std::to_string(id) + " outside vocabulary");
    }
  }
  return utf8::encode(out);
}

}  // namespace polyg2p
