#include <doctest.h>

#include "error.hpp"
#include "text_template.hpp"

using namespace polyg2p;

TEST_SUITE("templates") {
  TEST_CASE("render substitutes slots and keeps escapes") {
    const TextTemplate t("{{x}} {a}-{b}");
    CHECK(t.slots() == std::vector<std::string>{"a", "b"});
    CHECK(t.render({{"a", "1"}, {"b", "2"}}) == "{x} 1-2");
  }

  TEST_CASE("missing value is an error") {
    const TextTemplate t("{a}");
    CHECK_THROWS_AS(t.render({}), Error);
  }

  TEST_CASE("unterminated or invalid slots are rejected") {
    CHECK_THROWS_AS(TextTemplate("{a"), Error);
    CHECK_THROWS_AS(TextTemplate("{A}"), Error);
    CHECK_THROWS_AS(TextTemplate("a}"), Error);
  }

  TEST_CASE("render_lines drops lines whose slots are all empty") {
    const TextTemplate t("head\n{a}\n{b} {c}\ntail {a}\nend");
    CHECK(t.render_lines({{"a", ""}, {"b", ""}, {"c", ""}}) == "head\ntail \nend");
    CHECK(t.render_lines({{"a", "A"}, {"b", ""}, {"c", "C"}}) == "head\nA\n C\ntail A\nend");
  }

  TEST_CASE("render_lines drops a trailing empty line without leaving a newline") {
    const TextTemplate t("x\n{k}");
    CHECK(t.render_lines({{"k", ""}}) == "x");
    CHECK(t.render_lines({{"k", "v"}}) == "x\nv");
  }

  TEST_CASE("render_compact swallows separators before empty slots") {
    const TextTemplate t("{pinyin}: {pos}; {definitions}; {phrases}");
    CHECK(t.render_compact({{"pinyin", "hong2"}, {"pos", "形"}, {"definitions", "红色"}, {"phrases", "红旗"}}) ==
          "hong2: 形; 红色; 红旗");
    CHECK(t.render_compact({{"pinyin", "hong2"}, {"pos", "形"}, {"definitions", ""}, {"phrases", ""}}) ==
          "hong2: 形");
    CHECK(t.render_compact({{"pinyin", "hong2"}, {"pos", "形"}, {"definitions", ""}, {"phrases", "红旗"}}) ==
          "hong2: 形; 红旗");
  }
}
