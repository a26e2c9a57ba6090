#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace polyg2p {

// Literal text interleaved with `{slot}` placeholders. `{{` and `}}` escape
// literal braces.
class TextTemplate {
 public:
  TextTemplate() = default;
  explicit TextTemplate(std::string_view source);

  using Values = std::map<std::string, std::string, std::less<>>;

  // Plain substitution. Throws Error(InvalidArgument) for a slot without a value.
  std::string render(const Values& values) const;

  // Like render(), but a line that holds only slots (and whitespace) which all
  // expand to the empty string is removed together with its newline.
  std::string render_lines(const Values& values) const;

  // Like render(), but every slot after the first that expands to the empty
  // string also swallows the literal text that precedes it. Used for
  // single-line layouts such as "{a}: {b}; {c}" so missing fields leave no
  // dangling separators.
  std::string render_compact(const Values& values) const;

  const std::vector<std::string>& slots() const noexcept { return slot_names_; }
  const std::string& source() const noexcept { return source_; }

 private:
  struct Piece {
    bool is_slot;
    std::string text;
  };
  const std::string& lookup(const Values& values, const std::string& name) const;

  std::string source_;
  std::vector<Piece> pieces_;
  std::vector<std::string> slot_names_;
};

}  // namespace polyg2p
