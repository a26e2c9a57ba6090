#include "prompting.hpp"

#include <fstream>
#include <sstream>

#include "error.hpp"
#include "utf8.hpp"

namespace polyg2p {

Sample Sample::at(std::string sentence, std::size_t target_index, std::optional<PinyinSyllable> gold) {
  const auto cps = utf8::decode(sentence);
  if (target_index >= cps.size()) {
    throw Error(ErrorKind::IndexOutOfRange, "target index " + std::to_string(target_index) +
                                                " outside sentence of length " + std::to_string(cps.size()));
  }
  Sample s;
  s.target_char = cps[target_index];
  s.sentence = std::move(sentence);
  s.target_index = target_index;
  s.gold = std::move(gold);
  return s;
}

std::string Sample::target_utf8() const { return utf8::encode(target_char); }

std::string mark_target(const Sample& sample) {
  const auto cps = utf8::decode(sample.sentence);
  if (sample.target_index >= cps.size()) {
    throw Error(ErrorKind::IndexOutOfRange, "target index " + std::to_string(sample.target_index) +
                                                " outside sentence of length " + std::to_string(cps.size()));
  }
  std::u32string marked;
  marked.reserve(cps.size() + 2);
  marked.append(cps, 0, sample.target_index);
  marked.push_back(kTargetMarkerCp);
  marked.push_back(cps[sample.target_index]);
  marked.push_back(kTargetMarkerCp);
  marked.append(cps, sample.target_index + 1);
  return utf8::encode(marked);
}

Sample sample_from_marked(std::string_view marked, std::optional<PinyinSyllable> gold) {
  const auto cps = utf8::decode(marked);
  std::vector<std::size_t> at;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (cps[i] == kTargetMarkerCp) at.push_back(i);
  }
  if (at.size() != 2) {
    throw Error(ErrorKind::Format, "expected 2 target markers, found " + std::to_string(at.size()));
  }
  if (at[1] - at[0] != 2) {
    throw Error(ErrorKind::Format, "markers must enclose exactly one character, found " +
                                       std::to_string(at[1] - at[0] - 1));
  }
  std::u32string plain;
  plain.reserve(cps.size() - 2);
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (i != at[0] && i != at[1]) plain.push_back(cps[i]);
  }
  return Sample::at(utf8::encode(plain), at[0], std::move(gold));
}

std::string_view style_name(Style style) {
  return style == Style::Completion ? "completion" : "choice";
}

Style parse_style(std::string_view name) {
  if (name == "completion") return Style::Completion;
  if (name == "choice" || name == "multiple-choice") return Style::MultipleChoice;
  throw Error(ErrorKind::InvalidArgument, "unknown prompt style '" + std::string(name) + "'");
}

std::string PromptStyle::label() const {
  std::string out(style_name(style));
  if (style == Style::Completion && name_candidates) out += "+named";
  out += include_knowledge ? "/knowledge" : "/plain";
  return out;
}

namespace {

const char* const kRequired[] = {"completion", "completion_named", "choice",
                                 "candidate_line", "knowledge_header", "knowledge_line"};

void require_single(const TextTemplate& t, const std::string& name, std::string_view slot) {
  std::size_t count = 0;
  const std::string needle = "{" + std::string(slot) + "}";
  for (auto pos = t.source().find(needle); pos != std::string::npos; pos = t.source().find(needle, pos + 1)) {
    ++count;
  }
  if (count != 1) {
    throw Error(ErrorKind::Format, "template '" + name + "' must use " + needle + " exactly once");
  }
}

}  // namespace

TemplateCatalog TemplateCatalog::parse(std::string_view text) {
  TemplateCatalog catalog;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  std::string current;
  std::string body;
  bool in_block = false;
  bool first_body_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (in_block) {
      if (line == "@end") {
        if (catalog.templates_.count(current)) {
          throw LineError(ErrorKind::Format, line_no, "duplicate template '" + current + "'");
        }
        catalog.templates_.emplace(current, TextTemplate(body));
        in_block = false;
        continue;
      }
      if (!first_body_line) body += '\n';
      body += line;
      first_body_line = false;
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("@version ", 0) == 0) {
      try {
        catalog.version_ = std::stoi(line.substr(9));
      } catch (const std::exception&) {
        throw LineError(ErrorKind::Format, line_no, "bad version");
      }
    } else if (line.rfind("@template ", 0) == 0) {
      current = line.substr(10);
      if (current.empty()) throw LineError(ErrorKind::Format, line_no, "template without a name");
      body.clear();
      first_body_line = true;
      in_block = true;
    } else {
      throw LineError(ErrorKind::Format, line_no, "unexpected text outside a template block");
    }
  }
  if (in_block) throw Error(ErrorKind::Format, "template '" + current + "' is missing @end");
  if (catalog.version_ < 1) throw Error(ErrorKind::Format, "catalog has no @version");
  for (const char* name : kRequired) {
    if (!catalog.templates_.count(std::string_view(name))) {
      throw Error(ErrorKind::Format, std::string("catalog lacks template '") + name + "'");
    }
  }
  for (const char* name : {"completion", "completion_named", "choice"}) {
    require_single(catalog.get(name), name, "sentence");
    require_single(catalog.get(name), name, "knowledge");
  }
  require_single(catalog.get("choice"), "choice", "candidates");
  require_single(catalog.get("completion_named"), "completion_named", "candidates");
  return catalog;
}

TemplateCatalog TemplateCatalog::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open template catalog " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

TemplateCatalog TemplateCatalog::builtin() {
  static const TemplateCatalog catalog = parse(builtin_catalog_text());
  return catalog;
}

const TextTemplate& TemplateCatalog::get(std::string_view name) const {
  const auto it = templates_.find(name);
  if (it == templates_.end()) throw Error(ErrorKind::InvalidArgument, "no template '" + std::string(name) + "'");
  return it->second;
}

KnowledgeLayout TemplateCatalog::knowledge_layout() const {
  KnowledgeLayout layout;
  layout.header = get("knowledge_header").source();
  layout.line = get("knowledge_line");
  return layout;
}

Prompt build_prompt(const Sample& sample, const Dictionary& dict, const PromptStyle& style,
                    const KnowledgeLimits& limits, const TemplateCatalog& catalog) {
  Prompt prompt;
  prompt.style = style;
  prompt.marked_sentence = mark_target(sample);

  const std::string target = sample.target_utf8();
  const CharacterEntry* entry = dict.find(sample.target_char);
  const bool lists_candidates =
      style.style == Style::MultipleChoice || (style.style == Style::Completion && style.name_candidates);
  if (lists_candidates && entry == nullptr) {
    throw Error(ErrorKind::UnknownCharacter, "'" + target + "' is not in the dictionary");
  }

  std::string candidate_text;
  if (lists_candidates) {
    const TextTemplate& line = catalog.get("candidate_line");
    for (const auto& s : entry->senses) {
      if (!candidate_text.empty()) candidate_text += '\n';
      candidate_text += line.render({{"pinyin", s.pinyin.text()}});
    }
  }
  // Knowledge for a character the dictionary lacks degrades to nothing.
  std::string knowledge;
  if (style.include_knowledge && entry != nullptr) {
    knowledge = knowledge_block(dict, target, limits, catalog.knowledge_layout());
  }
  if (lists_candidates || !knowledge.empty()) {
    for (const auto& s : entry->senses) prompt.candidate_order.push_back(s.pinyin);
  }

  std::string_view name = "choice";
  if (style.style == Style::Completion) name = style.name_candidates ? "completion_named" : "completion";
  const TextTemplate& tmpl = catalog.get(name);
  TextTemplate::Values values{{"sentence", prompt.marked_sentence}, {"knowledge", knowledge}};
  if (lists_candidates) values.emplace("candidates", candidate_text);
  prompt.text = tmpl.render_lines(values);
  return prompt;
}

}  // namespace polyg2p
