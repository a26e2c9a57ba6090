#include "dictionary.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "error.hpp"
#include "utf8.hpp"

namespace polyg2p {

using json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kProvenancePrefix = "# provenance: ";

bool contains(std::string_view haystack, std::string_view needle) {
  return haystack.find(needle) != std::string_view::npos;
}

char32_t single_code_point(std::string_view text) {
  const auto cps = utf8::decode(text);
  if (cps.size() != 1) return 0;
  return cps[0];
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Throws a string for the caller to wrap with the line number.
std::vector<std::string> string_array(const json& obj, const char* field) {
  if (!obj.contains(field)) return {};
  const auto& arr = obj.at(field);
  if (!arr.is_array()) throw std::string("field '") + field + "' must be an array";
  std::vector<std::string> out;
  for (const auto& v : arr) {
    if (!v.is_string()) throw std::string("field '") + field + "' must hold strings";
    out.push_back(v.get<std::string>());
  }
  return out;
}

void validate_entry(const CharacterEntry& entry) {
  const std::string ch = utf8::encode(entry.character);
  if (entry.senses.size() < 2) {
    throw Error(ErrorKind::Schema, "'" + ch + "' has fewer than 2 senses");
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < entry.senses.size(); ++i) {
    const Sense& s = entry.senses[i];
    if (s.freq_rank != static_cast<int>(i)) {
      throw Error(ErrorKind::Schema, "'" + ch + "' freq_rank values are not 0..k-1");
    }
    if (!seen.insert(s.pinyin.text()).second) {
      throw Error(ErrorKind::Schema, "'" + ch + "' repeats pinyin " + s.pinyin.text());
    }
    for (const auto& phrase : s.phrases) {
      if (!contains(phrase, ch)) {
        throw Error(ErrorKind::Schema, "phrase '" + phrase + "' does not contain '" + ch + "'");
      }
    }
  }
}

}  // namespace

Dictionary::Dictionary(std::vector<CharacterEntry> entries, std::string provenance)
    : provenance_(std::move(provenance)) {
  for (auto& entry : entries) {
    std::stable_sort(entry.senses.begin(), entry.senses.end(),
                     [](const Sense& a, const Sense& b) { return a.freq_rank < b.freq_rank; });
    validate_entry(entry);
    const char32_t key = entry.character;
    if (!entries_.emplace(key, std::move(entry)).second) {
      throw Error(ErrorKind::Schema, "duplicate character '" + utf8::encode(key) + "'");
    }
  }
}

const CharacterEntry* Dictionary::find(char32_t character) const {
  const auto it = entries_.find(character);
  return it == entries_.end() ? nullptr : &it->second;
}

const CharacterEntry* Dictionary::find(std::string_view utf8_character) const {
  const char32_t cp = single_code_point(utf8_character);
  return cp == 0 ? nullptr : find(cp);
}

Dictionary parse_dictionary(std::istream& in) {
  std::vector<CharacterEntry> entries;
  std::set<char32_t> seen;
  std::string provenance;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.rfind(kProvenancePrefix, 0) == 0) {
      provenance = raw.substr(kProvenancePrefix.size());
      continue;
    }
    if (trim(raw).empty() || raw[0] == '#') continue;

    auto fail = [&](const std::string& reason) -> LineError {
      return LineError(ErrorKind::Schema, line_no, reason);
    };
    json obj;
    try {
      obj = json::parse(raw);
    } catch (const json::parse_error& e) {
      throw fail(std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw fail("record is not an object");
    if (!obj.contains("char") || !obj["char"].is_string()) throw fail("missing string field 'char'");
    const std::string ch = obj["char"].get<std::string>();
    const char32_t cp = single_code_point(ch);
    if (cp == 0) throw fail("'char' must be exactly one character");
    if (!seen.insert(cp).second) throw fail("duplicate character '" + ch + "'");
    if (!obj.contains("senses") || !obj["senses"].is_array()) throw fail("missing array field 'senses'");

    CharacterEntry entry{cp, {}};
    try {
      for (const auto& s : obj["senses"]) {
        if (!s.is_object()) throw std::string("sense is not an object");
        if (!s.contains("pinyin") || !s["pinyin"].is_string()) throw std::string("sense without 'pinyin'");
        if (!s.contains("freq_rank") || !s["freq_rank"].is_number_integer()) {
          throw std::string("sense without integer 'freq_rank'");
        }
        const auto text = s["pinyin"].get<std::string>();
        if (!is_pinyin(text)) throw std::string("malformed pinyin '" + text + "'");
        const auto rank = s["freq_rank"].get<long long>();
        if (rank < 0 || rank > 1000) throw std::string("freq_rank out of range");
        entry.senses.push_back(Sense{parse_pinyin(text), string_array(s, "pos"), string_array(s, "defs"),
                                     string_array(s, "phrases"), static_cast<int>(rank)});
      }
    } catch (const std::string& reason) {
      throw fail(reason);
    }
    std::stable_sort(entry.senses.begin(), entry.senses.end(),
                     [](const Sense& a, const Sense& b) { return a.freq_rank < b.freq_rank; });
    try {
      validate_entry(entry);
    } catch (const Error& e) {
      throw fail(e.what());
    }
    entries.push_back(std::move(entry));
  }
  return Dictionary(std::move(entries), std::move(provenance));
}

Dictionary load_dictionary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open dictionary " + path.string());
  return parse_dictionary(in);
}

std::string serialize_dictionary(const Dictionary& dict) {
  std::string out;
  if (!dict.provenance().empty()) {
    out += kProvenancePrefix;
    out += dict.provenance();
    out += '\n';
  }
  for (const auto& [cp, entry] : dict.entries()) {
    json senses = json::array();
    for (const auto& s : entry.senses) {
      json js;
      js["pinyin"] = s.pinyin.text();
      js["pos"] = s.pos_tags;
      js["defs"] = s.definitions;
      js["phrases"] = s.phrases;
      js["freq_rank"] = s.freq_rank;
      senses.push_back(std::move(js));
    }
    json obj;
    obj["char"] = utf8::encode(cp);
    obj["senses"] = std::move(senses);
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void save_dictionary(const Dictionary& dict, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write dictionary " + path.string());
  out << serialize_dictionary(dict);
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

std::vector<RawRecord> parse_raw_records(std::istream& in) {
  std::vector<RawRecord> records;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (trim(raw).empty() || raw[0] == '#') continue;
    try {
      const json obj = json::parse(raw);
      if (!obj.is_object()) throw std::string("record is not an object");
      if (!obj.contains("char") || !obj["char"].is_string()) throw std::string("missing string field 'char'");
      if (!obj.contains("pinyin") || !obj["pinyin"].is_string()) throw std::string("missing string field 'pinyin'");
      RawRecord r;
      r.character = obj["char"].get<std::string>();
      if (single_code_point(r.character) == 0) throw std::string("'char' must be exactly one character");
      r.pinyin = obj["pinyin"].get<std::string>();
      if (!is_pinyin(r.pinyin)) throw std::string("malformed pinyin '" + r.pinyin + "'");
      r.pos_tags = string_array(obj, "pos");
      r.definitions = string_array(obj, "defs");
      r.phrases = string_array(obj, "phrases");
      if (obj.contains("count")) {
        if (!obj["count"].is_number_integer()) throw std::string("'count' must be an integer");
        r.frequency_count = obj["count"].get<long long>();
        if (r.frequency_count < 0) throw std::string("'count' must be >= 0");
      }
      records.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw LineError(ErrorKind::Schema, line_no, std::string("invalid JSON: ") + e.what());
    } catch (const std::string& reason) {
      throw LineError(ErrorKind::Schema, line_no, reason);
    }
  }
  return records;
}

std::vector<RawRecord> load_raw_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open raw records " + path.string());
  return parse_raw_records(in);
}

Dictionary build_dictionary(const std::vector<RawRecord>& records, std::string provenance) {
  struct Pending {
    std::string pinyin;
    std::size_t first_seen;
    long long count = 0;
    std::vector<std::string> pos, defs, phrases;
  };
  // character -> senses in first-appearance order
  std::map<char32_t, std::vector<Pending>> grouped;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const RawRecord& r = records[i];
    if (r.frequency_count < 0) {
      throw Error(ErrorKind::InvalidArgument, "negative frequency count for '" + r.character + "'");
    }
    const char32_t cp = single_code_point(r.character);
    if (cp == 0) throw Error(ErrorKind::InvalidArgument, "raw record character must be one code point");
    auto& senses = grouped[cp];
    auto it = std::find_if(senses.begin(), senses.end(), [&](const Pending& p) { return p.pinyin == r.pinyin; });
    if (it == senses.end()) {
      senses.push_back(Pending{r.pinyin, i, 0, {}, {}, {}});
      it = std::prev(senses.end());
    }
    it->count += r.frequency_count;
    for (const auto& tag : r.pos_tags) {
      if (std::find(it->pos.begin(), it->pos.end(), tag) == it->pos.end()) it->pos.push_back(tag);
    }
    it->defs.insert(it->defs.end(), r.definitions.begin(), r.definitions.end());
    // phrases must mention the character; others are dropped here
    for (const auto& phrase : r.phrases) {
      if (contains(phrase, r.character)) it->phrases.push_back(phrase);
    }
  }

  std::vector<CharacterEntry> entries;
  for (auto& [cp, senses] : grouped) {
    if (senses.size() < 2) continue;
    std::stable_sort(senses.begin(), senses.end(), [](const Pending& a, const Pending& b) {
      if (a.count != b.count) return a.count > b.count;
      return a.first_seen < b.first_seen;
    });
    CharacterEntry entry{cp, {}};
    for (std::size_t rank = 0; rank < senses.size(); ++rank) {
      auto& p = senses[rank];
      entry.senses.push_back(Sense{parse_pinyin(p.pinyin), std::move(p.pos), std::move(p.defs),
                                   std::move(p.phrases), static_cast<int>(rank)});
    }
    entries.push_back(std::move(entry));
  }
  return Dictionary(std::move(entries), std::move(provenance));
}

std::vector<PinyinSyllable> candidates(const Dictionary& dict, std::string_view character) {
  std::vector<PinyinSyllable> out;
  if (const auto* entry = dict.find(character)) {
    for (const auto& s : entry->senses) out.push_back(s.pinyin);
  }
  return out;
}

std::string knowledge_block(const Dictionary& dict, std::string_view character, const KnowledgeLimits& limits,
                            const KnowledgeLayout& layout) {
  const auto* entry = dict.find(character);
  if (entry == nullptr) {
    throw Error(ErrorKind::UnknownCharacter, "'" + std::string(character) + "' is not in the dictionary");
  }
  auto join_prefix = [&](const std::vector<std::string>& items, int limit) {
    std::string out;
    const auto n = std::min<std::size_t>(items.size(), static_cast<std::size_t>(std::max(limit, 0)));
    for (std::size_t i = 0; i < n; ++i) {
      if (i) out += layout.list_separator;
      out += items[i];
    }
    return out;
  };
  std::string out = layout.header;
  for (const auto& s : entry->senses) {
    if (!out.empty()) out += '\n';
    TextTemplate::Values values{
        {"pinyin", s.pinyin.text()},
        {"pos", join_prefix(s.pos_tags, static_cast<int>(s.pos_tags.size()))},
        {"definitions", join_prefix(s.definitions, limits.max_definitions)},
        {"phrases", join_prefix(s.phrases, limits.max_phrases)},
    };
    out += layout.line.render_compact(values);
  }
  return out;
}

}  // namespace polyg2p
