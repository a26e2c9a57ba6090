#include "text_template.hpp"

#include <algorithm>

#include "error.hpp"

namespace polyg2p {

TextTemplate::TextTemplate(std::string_view source) : source_(source) {
  std::string literal;
  for (std::size_t i = 0; i < source.size(); ++i) {
    const char c = source[i];
    if (c == '{' && i + 1 < source.size() && source[i + 1] == '{') {
      literal.push_back('{');
      ++i;
    } else if (c == '}' && i + 1 < source.size() && source[i + 1] == '}') {
      literal.push_back('}');
      ++i;
    } else if (c == '{') {
      const auto close = source.find('}', i + 1);
      if (close == std::string_view::npos) {
        throw Error(ErrorKind::InvalidArgument, "unterminated slot in template");
      }
      std::string name(source.substr(i + 1, close - i - 1));
      if (name.empty() || !std::all_of(name.begin(), name.end(), [](char ch) {
            return (ch >= 'a' && ch <= 'z') || ch == '_';
          })) {
        throw Error(ErrorKind::InvalidArgument, "bad slot name '{" + name + "}'");
      }
      if (!literal.empty()) pieces_.push_back({false, std::move(literal)});
      literal.clear();
      pieces_.push_back({true, name});
      if (std::find(slot_names_.begin(), slot_names_.end(), name) == slot_names_.end()) {
        slot_names_.push_back(name);
      }
      i = close;
    } else if (c == '}') {
      throw Error(ErrorKind::InvalidArgument, "stray '}' in template");
    } else {
      literal.push_back(c);
    }
  }
  if (!literal.empty()) pieces_.push_back({false, std::move(literal)});
}

const std::string& TextTemplate::lookup(const Values& values, const std::string& name) const {
  const auto it = values.find(name);
  if (it == values.end()) {
    throw Error(ErrorKind::InvalidArgument, "no value for slot {" + name + "}");
  }
  return it->second;
}

std::string TextTemplate::render(const Values& values) const {
  std::string out;
  for (const auto& piece : pieces_) {
    out += piece.is_slot ? lookup(values, piece.text) : piece.text;
  }
  return out;
}

std::string TextTemplate::render_compact(const Values& values) const {
  std::string out;
  std::string pending;  // literal waiting to see whether the next slot is empty
  bool seen_slot = false;
  for (const auto& piece : pieces_) {
    if (!piece.is_slot) {
      pending += piece.text;
      continue;
    }
    const std::string& value = lookup(values, piece.text);
    if (value.empty() && seen_slot) {
      pending.clear();
    } else {
      out += pending;
      out += value;
      pending.clear();
    }
    seen_slot = true;
  }
  return out + pending;
}

std::string TextTemplate::render_lines(const Values& values) const {
  // Render line by line over the piece stream. A line is dropped when it
  // contains at least one slot, every slot on it is empty, and its literal
  // text is whitespace only.
  std::string out;
  std::string line;
  bool line_has_slot = false;
  bool line_all_empty = true;
  bool line_literal_blank = true;
  bool last_dropped = false;

  auto flush = [&](bool with_newline) {
    const bool drop = line_has_slot && line_all_empty && line_literal_blank;
    last_dropped = drop;
    if (!drop) {
      out += line;
      if (with_newline) out.push_back('\n');
    }
    line.clear();
    line_has_slot = false;
    line_all_empty = true;
    line_literal_blank = true;
  };

  for (const auto& piece : pieces_) {
    if (piece.is_slot) {
      const std::string& value = lookup(values, piece.text);
      line_has_slot = true;
      if (!value.empty()) line_all_empty = false;
      line += value;
      continue;
    }
    std::size_t start = 0;
    while (start <= piece.text.size()) {
      const auto nl = piece.text.find('\n', start);
      const auto chunk = piece.text.substr(start, nl == std::string::npos ? std::string::npos : nl - start);
      if (chunk.find_first_not_of(" \t") != std::string::npos) line_literal_blank = false;
      line += chunk;
      if (nl == std::string::npos) break;
      flush(true);
      start = nl + 1;
    }
  }
  flush(false);
  // A dropped final line leaves the preceding newline dangling.
  if (last_dropped && !out.empty() && out.back() == '\n') {
    out.pop_back();
  }
  return out;
}

}  // namespace polyg2p
