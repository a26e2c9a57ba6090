#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dictionary.hpp"
#include "error.hpp"
#include "prompting.hpp"
#include "utf8.hpp"

using namespace polyg2p;
namespace fs = std::filesystem;

namespace {

const fs::path kData = POLYG2P_TEST_DATA;
const std::string kMarked = "农夫释耒，▂红▂女下机";

std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto at = hay.find(needle); at != std::string::npos; at = hay.find(needle, at + needle.size())) ++n;
  return n;
}

// POLYG2P_UPDATE_GOLDEN=1 rewrites the files instead of comparing.
void check_golden(const std::string& name, const std::string& actual) {
  const auto path = kData / "golden" / name;
  if (std::getenv("POLYG2P_UPDATE_GOLDEN")) {
    std::ofstream(path, std::ios::binary) << actual;
    return;
  }
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in, "missing golden file ", path.string());
  std::stringstream want;
  want << in.rdbuf();
  CHECK(actual == want.str());
}

PromptStyle style(Style s, bool k) {
  PromptStyle p;
  p.style = s;
  p.include_knowledge = k;
  return p;
}

}  // namespace

TEST_SUITE("prompting") {
  TEST_CASE("marker round trip") {
    const auto s = sample_from_marked(kMarked);
    CHECK(s.sentence == "农夫释耒，红女下机");
    CHECK(s.target_index == 5);
    CHECK(s.target_char == U'红');
    CHECK(mark_target(s) == kMarked);
    CHECK(Sample::at("农夫释耒，红女下机", 5).target_utf8() == "红");
  }

  TEST_CASE("bad markers and indices") {
    auto kind = [](auto&& f) {
      try {
        f();
      } catch (const Error& e) {
        return e.kind();
      }
      return ErrorKind::InvalidArgument;
    };
    CHECK(kind([] { (void)sample_from_marked("红女"); }) == ErrorKind::Format);
    CHECK(kind([] { (void)sample_from_marked("▂红女▂"); }) == ErrorKind::Format);
    CHECK(kind([] { (void)sample_from_marked("▂红▂▂女▂"); }) == ErrorKind::Format);
    CHECK(kind([] { (void)Sample::at("红女", 2); }) == ErrorKind::IndexOutOfRange);
  }

  TEST_CASE("style names") {
    CHECK(style_name(Style::Completion) == "completion");
    CHECK(style_name(Style::MultipleChoice) == "choice");
    CHECK(parse_style("choice") == Style::MultipleChoice);
    CHECK_THROWS_AS(parse_style("cloze"), Error);
    CHECK(style(Style::MultipleChoice, true).label() == "choice/knowledge");
  }

  TEST_CASE("golden prompts for the four style combinations") {
    const auto dict = load_dictionary(kData / "fixtures/dict.jsonl");
    const auto s = sample_from_marked(kMarked);
    const KnowledgeLimits limits{2, 2};
    check_golden("prompt_choice_knowledge.txt", build_prompt(s, dict, style(Style::MultipleChoice, true), limits).text);
    check_golden("prompt_choice_plain.txt", build_prompt(s, dict, style(Style::MultipleChoice, false), limits).text);
    check_golden("prompt_completion_knowledge.txt", build_prompt(s, dict, style(Style::Completion, true), limits).text);
    check_golden("prompt_completion_plain.txt", build_prompt(s, dict, style(Style::Completion, false), limits).text);
  }

  TEST_CASE("prompt invariants") {
    const auto dict = load_dictionary(kData / "fixtures/dict.jsonl");
    const auto s = sample_from_marked(kMarked);
    for (Style st : {Style::Completion, Style::MultipleChoice}) {
      for (bool k : {false, true}) {
        CAPTURE(style(st, k).label());
        const auto p = build_prompt(s, dict, style(st, k));
        CHECK(count_of(p.text, kMarked) == 1);
        CHECK(count_of(p.text, std::string(kTargetMarker)) == 2);
        CHECK(p.text.find("\n\n") == std::string::npos);
        if (st == Style::MultipleChoice) {
          REQUIRE(p.candidate_order.size() == 2);
          CHECK(p.candidate_order[0].text() == "hong2");
          CHECK(p.candidate_order[1].text() == "gong1");
          CHECK(p.text.find("hong2") < p.text.find("gong1"));
        }
        if (!k) CHECK(p.text.find("像鲜血的颜色") == std::string::npos);
        if (k) CHECK(p.text.find("像鲜血的颜色") != std::string::npos);
        if (st == Style::Completion && !k) {
          CHECK(p.text.find("hong2") == std::string::npos);
          CHECK(p.text.find("gong1") == std::string::npos);
          CHECK(p.candidate_order.empty());
        }
      }
    }
  }

  TEST_CASE("named completion lists candidates without knowledge") {
    const auto dict = load_dictionary(kData / "fixtures/dict.jsonl");
    auto st = style(Style::Completion, false);
    st.name_candidates = true;
    const auto p = build_prompt(sample_from_marked(kMarked), dict, st);
    CHECK(p.text.find("hong2") != std::string::npos);
    CHECK(p.candidate_order.size() == 2);
  }

  TEST_CASE("unknown characters") {
    const auto dict = load_dictionary(kData / "fixtures/dict.jsonl");
    const auto s = sample_from_marked("农夫释耒，红▂女▂下机");
    CHECK_THROWS_AS(build_prompt(s, dict, style(Style::MultipleChoice, true)), Error);
    const auto p = build_prompt(s, dict, style(Style::Completion, true));
    CHECK(p.candidate_order.empty());
    CHECK(p.text.find("释义") == std::string::npos);
  }

  TEST_CASE("catalog parsing") {
    const auto builtin = TemplateCatalog::builtin();
    CHECK(builtin.version() == 1);
    CHECK(TemplateCatalog::parse(builtin_catalog_text()).get("choice").source() ==
          builtin.get("choice").source());
    CHECK_THROWS_AS(TemplateCatalog::parse("@template choice\n{sentence}\n"), Error);
    CHECK_THROWS_AS(TemplateCatalog::parse("@version 1\n@template completion\n{sentence}\n@end\n"), Error);
    try {
      (void)TemplateCatalog::parse("@version 1\nstray text\n");
      FAIL("no error");
    } catch (const LineError& e) {
      CHECK(e.line() == 2);
    }
  }
}
