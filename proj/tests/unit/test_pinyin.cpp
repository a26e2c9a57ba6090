#include <doctest.h>

#include "error.hpp"
#include "oracles.hpp"
#include "pinyin.hpp"
#include "random.hpp"
#include "utf8.hpp"

using namespace polyg2p;

TEST_SUITE("pinyin_core") {
  TEST_CASE("parse_pinyin examples") {
    const auto hong = parse_pinyin("hong2");
    CHECK(hong.base() == "hong");
    CHECK(hong.tone() == 2);
    CHECK(hong.text() == "hong2");

    const auto a = parse_pinyin("a1");
    CHECK(a.base() == "a");
    CHECK(a.tone() == 1);
  }

  TEST_CASE("malformed pinyin is rejected") {
    for (const char* bad : {"hong", "", "2", "hong0", "hong6", "Hong2", "hong22", "ho ng2", "hong2 ", "hóng2", "ü3"}) {
      CAPTURE(bad);
      CHECK_FALSE(is_pinyin(bad));
      try {
        (void)parse_pinyin(bad);
        FAIL("accepted malformed pinyin");
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::MalformedPinyin);
      }
    }
    CHECK_THROWS_AS(PinyinSyllable("", 1), Error);
    CHECK_THROWS_AS(PinyinSyllable("ma", 0), Error);
    CHECK_THROWS_AS(PinyinSyllable("ma", 6), Error);
  }

  TEST_CASE("parse and format round-trip on random syllables") {
    Rng rng(11);
    for (int n = 0; n < 2000; ++n) {
      std::string text;
      const auto len = 1 + rng.below(6);
      for (std::uint64_t i = 0; i < len; ++i) text.push_back(static_cast<char>('a' + rng.below(26)));
      text.push_back(static_cast<char>('1' + rng.below(5)));
      CHECK(parse_pinyin(text).text() == text);
    }
  }

  TEST_CASE("syllables order by canonical text") {
    CHECK(parse_pinyin("a1") < parse_pinyin("b2"));
    CHECK(parse_pinyin("hong2") < parse_pinyin("hong3"));
    CHECK(parse_pinyin("gong1") == PinyinSyllable("gong", 1));
  }

  TEST_CASE("edit_distance examples") {
    CHECK(edit_distance("hong2", "hong2") == 0);
    CHECK(edit_distance("gong", "gong1") == 1);
    CHECK(edit_distance("gong", "hong2") == 2);
    // Same pairs through the recursive oracle.
    CHECK(testing::naive_levenshtein(U"gong", U"gong1") == 1);
    CHECK(testing::naive_levenshtein(U"gong", U"hong2") == 2);
  }

  TEST_CASE("edit_distance counts code points, not bytes") {
    CHECK(edit_distance("红", "工") == 1);
    CHECK(edit_distance("女红", "红") == 1);
    CHECK(edit_distance("", "红色") == 2);
  }

  TEST_CASE("edit_distance is symmetric and zero iff equal") {
    Rng rng(5);
    const std::u32string alphabet = U"abg12红";
    for (int n = 0; n < 3000; ++n) {
      std::u32string a, b;
      for (auto len = rng.below(7); len > 0; --len) a.push_back(alphabet[rng.below(alphabet.size())]);
      for (auto len = rng.below(7); len > 0; --len) b.push_back(alphabet[rng.below(alphabet.size())]);
      const auto ab = edit_distance(a, b);
      CHECK(ab == edit_distance(b, a));
      CHECK((ab == 0) == (a == b));
      CHECK(ab == edit_distance(utf8::encode(a), utf8::encode(b)));
      CHECK(ab == testing::matrix_levenshtein(a, b));
    }
  }
}

TEST_SUITE("utf8") {
  TEST_CASE("round trip and length") {
    const std::string s = "农夫释耒，▂红▂女下机 abc";
    CHECK(utf8::encode(utf8::decode(s)) == s);
    CHECK(utf8::length(s) == 15);
    CHECK(utf8::encode(U'红') == "红");
  }

  TEST_CASE("invalid bytes become replacement characters") {
    const auto cps = utf8::decode(std::string("a\xFF" "b\xE7\xBA", 5));
    REQUIRE(cps.size() == 5);
    CHECK(cps[0] == U'a');
    CHECK(cps[1] == 0xFFFD);
    CHECK(cps[2] == U'b');
    CHECK(cps[3] == 0xFFFD);
  }
}
