#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dictionary.hpp"
#include "error.hpp"

using namespace polyg2p;
namespace fs = std::filesystem;

namespace {

const fs::path kData = POLYG2P_TEST_DATA;

std::size_t schema_line(const std::string& text) {
  std::istringstream in(text);
  try {
    (void)parse_dictionary(in);
  } catch (const LineError& e) {
    CHECK(e.kind() == ErrorKind::Schema);
    return e.line();
  }
  return 0;
}

std::size_t raw_line(const std::string& text) {
  std::istringstream in(text);
  try {
    (void)parse_raw_records(in);
  } catch (const LineError& e) {
    CHECK(e.kind() == ErrorKind::Schema);
    return e.line();
  }
  return 0;
}

RawRecord raw(std::string ch, std::string py, long long count, std::vector<std::string> phrases = {}) {
  RawRecord r;
  r.character = std::move(ch);
  r.pinyin = std::move(py);
  r.frequency_count = count;
  r.phrases = std::move(phrases);
  return r;
}

}  // namespace

TEST_SUITE("dictionary") {
  TEST_CASE("fixture loads with ranked senses") {
    const auto dict = load_dictionary(kData / "fixtures/dict.jsonl");
    CHECK(dict.entry_count() == 2);
    CHECK(dict.provenance() == "fixture raw records");
    const auto* hong = dict.find("红");
    REQUIRE(hong);
    REQUIRE(hong->senses.size() == 2);
    CHECK(hong->senses[0].pinyin.text() == "hong2");
    CHECK(hong->senses[1].pinyin.text() == "gong1");
    CHECK(hong->senses[0].freq_rank == 0);
    const auto c = candidates(dict, "行");
    REQUIRE(c.size() == 2);
    CHECK(c[0].text() == "xing2");
    CHECK(c[1].text() == "hang2");
    CHECK(candidates(dict, "女").empty());
    CHECK(dict.find(U'女') == nullptr);
  }

  TEST_CASE("missing file is an IO error") {
    try {
      (void)load_dictionary(kData / "fixtures/no_such.jsonl");
      FAIL("loaded a missing file");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Io);
    }
  }

  TEST_CASE("schema violations name the offending line") {
    const std::string ok =
        R"({"char":"行","senses":[{"pinyin":"xing2","freq_rank":0},{"pinyin":"hang2","freq_rank":1}]})";
    CHECK(schema_line(ok + "\n") == 0);
    CHECK(schema_line("# comment\n" + ok + "\n{not json\n") == 3);
    CHECK(schema_line(R"({"char":"行","senses":[{"pinyin":"xing2","freq_rank":0}]})") == 1);
    CHECK(schema_line(R"({"char":"行","senses":[{"pinyin":"xing2","freq_rank":0},{"pinyin":"xing2","freq_rank":1}]})") == 1);
    CHECK(schema_line(R"({"char":"行","senses":[{"pinyin":"xing2","freq_rank":0},{"pinyin":"hang2","freq_rank":2}]})") == 1);
    CHECK(schema_line(R"({"char":"行","senses":[{"pinyin":"xing","freq_rank":0},{"pinyin":"hang2","freq_rank":1}]})") == 1);
    CHECK(schema_line(R"({"char":"行行","senses":[{"pinyin":"xing2","freq_rank":0},{"pinyin":"hang2","freq_rank":1}]})") == 1);
    CHECK(schema_line(ok + "\n\n" + ok + "\n") == 3);
    CHECK(schema_line(R"({"char":"行","senses":[{"pinyin":"xing2","freq_rank":0,"phrases":["红旗"]},{"pinyin":"hang2","freq_rank":1}]})") == 1);
  }

  TEST_CASE("build merges repeated readings and drops monophones") {
    const auto dict = build_dictionary({raw("红", "hong2", 600, {"红色"}), raw("行", "xing2", 500),
                                        raw("行", "hang2", 300), raw("红", "gong1", 10), raw("女", "nv3", 400),
                                        raw("红", "hong2", 300, {"红旗"})},
                                       "unit");
    CHECK(dict.entry_count() == 2);
    CHECK(dict.find("女") == nullptr);
    const auto* hong = dict.find("红");
    REQUIRE(hong);
    REQUIRE(hong->senses.size() == 2);
    CHECK(hong->senses[0].pinyin.text() == "hong2");
    CHECK(hong->senses[0].phrases == std::vector<std::string>{"红色", "红旗"});
  }

  TEST_CASE("build ranks ties by first appearance") {
    const auto dict = build_dictionary({raw("长", "zhang3", 5), raw("长", "chang2", 5)});
    const auto c = candidates(dict, "长");
    REQUIRE(c.size() == 2);
    CHECK(c[0].text() == "zhang3");
    CHECK(c[1].text() == "chang2");
  }

  TEST_CASE("build of nothing polyphonic is empty, not an error") {
    CHECK(build_dictionary({raw("女", "nv3", 1)}).entry_count() == 0);
    CHECK(build_dictionary({}).entry_count() == 0);
  }

  TEST_CASE("raw records report the bad line") {
    const std::string ok = R"({"char":"红","pinyin":"hong2","count":3})";
    CHECK(raw_line(ok + "\n" + ok + "\n") == 0);
    CHECK(raw_line(ok + "\n" + R"({"char":"红","pinyin":"Hong2"})" + "\n") == 2);
    CHECK(raw_line(ok + "\n\n" + R"({"char":"红"})" + "\n") == 3);
    CHECK(raw_line(R"({"char":"红","pinyin":"hong2","count":-1})") == 1);
    CHECK(raw_line("[1,2]") == 1);
  }

  TEST_CASE("serialize and load round-trip") {
    const auto dict = load_dictionary(kData / "fixtures/dict.jsonl");
    const auto text = serialize_dictionary(dict);
    std::istringstream in(text);
    const auto again = parse_dictionary(in);
    CHECK(serialize_dictionary(again) == text);
    CHECK(again.provenance() == dict.provenance());

    const auto tmp = fs::temp_directory_path() / "polyg2p_dict_roundtrip.jsonl";
    save_dictionary(dict, tmp);
    CHECK(serialize_dictionary(load_dictionary(tmp)) == text);
    fs::remove(tmp);
  }

  TEST_CASE("knowledge block honours limits") {
    const auto dict = load_dictionary(kData / "fixtures/dict.jsonl");
    const auto full = knowledge_block(dict, "红", {3, 3});
    CHECK(full.find("hong2") != std::string::npos);
    CHECK(full.find("gong1") != std::string::npos);
    CHECK(full.find("像鲜血的颜色") != std::string::npos);
    CHECK(full.find("走红") != std::string::npos);
    CHECK(full.find("红包") == std::string::npos);
    CHECK(full.find("hong2") < full.find("gong1"));

    const auto one = knowledge_block(dict, "红", {1, 1});
    CHECK(one.find("像鲜血的颜色") != std::string::npos);
    CHECK(one.find("象征喜庆") == std::string::npos);
    CHECK(one.find("红色") != std::string::npos);
    CHECK(one.find("红旗") == std::string::npos);

    const auto bare = knowledge_block(dict, "红", {0, 0});
    CHECK(bare.find("像鲜血的颜色") == std::string::npos);
    CHECK(bare.find("红色") == std::string::npos);
    CHECK(bare.find("hong2") != std::string::npos);
    CHECK(bare.find(';') == std::string::npos);
  }

  TEST_CASE("knowledge block for an unknown character") {
    const auto dict = load_dictionary(kData / "fixtures/dict.jsonl");
    try {
      (void)knowledge_block(dict, "女", {});
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::UnknownCharacter);
    }
  }
}
