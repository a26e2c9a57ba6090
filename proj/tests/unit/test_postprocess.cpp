#include <doctest.h>

#include <algorithm>

#include "error.hpp"
#include "oracles.hpp"
#include "postprocess.hpp"
#include "random.hpp"

using namespace polyg2p;

namespace {

std::vector<PinyinSyllable> syl(std::initializer_list<const char*> texts) {
  std::vector<PinyinSyllable> out;
  for (const char* t : texts) out.push_back(parse_pinyin(t));
  return out;
}

}  // namespace

TEST_SUITE("postprocess") {
  TEST_CASE("extract_answer strips punctuation and finds the first syllable") {
    CHECK(extract_answer("hong2") == "hong2");
    CHECK(extract_answer("  hong2。") == "hong2");
    CHECK(extract_answer("\"gong1\"") == "gong1");
    CHECK(extract_answer("答案：gong1，") == "gong1");
    CHECK(extract_answer("hong2 gong1") == "hong2");
    CHECK(extract_answer("gong") == "gong");
    CHECK(extract_answer(" ，") == "");
  }

  TEST_CASE("valid answers pass through") {
    const auto c = syl({"hong2", "gong1"});
    const auto out = correct("gong1", c);
    CHECK(out.final_pinyin.text() == "gong1");
    CHECK(out.was_valid);
    CHECK(out.distance == 0);
  }

  TEST_CASE("invalid answers snap to the nearest candidate") {
    const auto c = syl({"hong2", "gong1"});
    const auto out = correct("gong", c);
    CHECK(out.final_pinyin.text() == "gong1");
    CHECK_FALSE(out.was_valid);
    CHECK(out.distance == 1);
  }

  TEST_CASE("ties go to the more frequent candidate") {
    const auto out = correct("ab", syl({"aa1", "bb1"}));
    CHECK(out.tie_broken);
    CHECK(out.final_pinyin.text() == "aa1");
    CHECK(correct("ab", syl({"bb1", "aa1"})).final_pinyin.text() == "bb1");
  }

  TEST_CASE("empty candidate list") {
    try {
      (void)correct("hong2", {});
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::EmptyCandidateList);
    }
  }

  TEST_CASE("correction always lands in the candidate set and matches brute force") {
    Rng rng(3);
    const std::string letters = "aghinoxz";
    for (int n = 0; n < 2000; ++n) {
      std::vector<PinyinSyllable> cands;
      const auto k = 1 + rng.below(4);
      while (cands.size() < k) {
        std::string base;
        for (auto len = 1 + rng.below(4); len > 0; --len) base.push_back(letters[rng.below(letters.size())]);
        PinyinSyllable s(base, static_cast<int>(1 + rng.below(5)));
        if (std::find(cands.begin(), cands.end(), s) == cands.end()) cands.push_back(s);
      }
      std::string gen;
      for (auto len = rng.below(7); len > 0; --len) gen.push_back((letters + "12 ,")[rng.below(letters.size() + 4)]);
      const auto out = correct(gen, cands);
      CAPTURE(gen);
      const auto want = testing::brute_force_choice(extract_answer(gen), cands);
      CHECK(out.final_pinyin == cands[want]);
      if (std::find(cands.begin(), cands.end(), out.final_pinyin) != cands.end() && out.was_valid) {
        CHECK(extract_answer(gen) == out.final_pinyin.text());
      }
    }
  }
}
