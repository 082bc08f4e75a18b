#include <random>

#include "doctest.h"
#include "epc/error.hpp"
#include "epc/masking.hpp"
#include "epc/text.hpp"
#include "test_util.hpp"

using namespace epc;

namespace {

AdviceStatement statement(std::string id, std::string text) {
  return AdviceStatement{std::move(id), std::move(text), {}};
}

std::string span_text(const AdviceStatement& st, const Occurrence& o) {
  return st.text.substr(o.start, o.end - o.start);
}

ErrorCode mask_error(std::string_view text, std::vector<Occurrence> occ) {
  try {
    mask_text(text, occ);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("find_occurrences") {
  SUBCASE("list context") {
    const auto st = statement("s", "Kidneys, liver, dairy are options.");
    const auto occ = find_occurrences("liver", st);
    REQUIRE(occ.size() == 1);
    CHECK(occ[0] == Occurrence{"s", 9, 14});
  }
  SUBCASE("word boundary blocks substrings") {
    CHECK(find_occurrences("liver", statement("s", "Deliver the package.")).empty());
    CHECK(find_occurrences("liver", statement("s", "livers")).empty());
    CHECK(find_occurrences("liver", statement("s", "liver_oil")).empty());
  }
  SUBCASE("multi-word surface") {
    const auto st = statement("s", "A glass of red wine a day");
    const auto occ = find_occurrences("red wine", st);
    REQUIRE(occ.size() == 1);
    CHECK(span_text(st, occ[0]) == "red wine");
  }
  SUBCASE("case-insensitive, whitespace-tolerant inside the surface") {
    const auto st = statement("s", "Red  Wine, then RED WINE again.");
    const auto occ = find_occurrences("red wine", st);
    REQUIRE(occ.size() == 2);
    CHECK(span_text(st, occ[0]) == "Red  Wine");
    CHECK(span_text(st, occ[1]) == "RED WINE");
  }
  SUBCASE("no match across punctuation") {
    CHECK(find_occurrences("red wine", statement("s", "red, wine")).empty());
  }
  SUBCASE("greedy left to right without overlap") {
    const auto st = statement("s", "aa aa aa");
    CHECK(find_occurrences("aa aa", st).size() == 1);
  }
  SUBCASE("surfaces ending in punctuation") {
    const auto st = statement("s", "Take vitamin C. daily");
    const auto occ = find_occurrences("vitamin c.", st);
    REQUIRE(occ.size() == 1);
    CHECK(span_text(st, occ[0]) == "vitamin C.");
  }
  SUBCASE("UTF-8 bytes count as word characters") {
    CHECK(find_occurrences("pâté", statement("s", "liver pâté")).size() == 1);
    CHECK(find_occurrences("pât", statement("s", "liver pâté")).empty());
  }
  SUBCASE("existing mask tokens are opaque") {
    CHECK(find_occurrences("mask", statement("s", "beef [MASK] or chicken")).empty());
    CHECK(find_occurrences("mask", statement("s", "wear a mask [MASK]")).size() == 1);
  }
  SUBCASE("blank surface is rejected") {
    CHECK_THROWS_AS(find_occurrences("  ", statement("s", "x")), Error);
  }
}

TEST_CASE("mask_text") {
  SUBCASE("single span") {
    const std::string text = "beef liver or chicken";
    const auto ctx = mask_text(text, std::vector<Occurrence>{{"s", 5, 10}});
    CHECK(ctx.masked_text == "beef [MASK] or chicken");
    CHECK(ctx.mask_count == 1);
    CHECK(ctx.statement_id == "s");
  }
  SUBCASE("no spans") {
    const auto ctx = mask_text("unchanged text", {});
    CHECK(ctx.masked_text == "unchanged text");
    CHECK(ctx.mask_count == 0);
  }
  SUBCASE("two spans") {
    const std::string text = "liver with liver pâté";
    const auto occ = find_occurrences("liver", statement("s", text));
    REQUIRE(occ.size() == 2);
    const auto ctx = mask_text(text, occ);
    CHECK(ctx.masked_text == "[MASK] with [MASK] pâté");
    CHECK(ctx.mask_count == 2);
  }
  SUBCASE("preconditions") {
    CHECK(mask_error("abcdef", {{"s", 0, 3}, {"s", 2, 4}}) == ErrorCode::kOverlappingSpans);
    CHECK(mask_error("abcdef", {{"s", 3, 4}, {"s", 0, 2}}) == ErrorCode::kOverlappingSpans);
    CHECK(mask_error("abcdef", {{"s", 4, 9}}) == ErrorCode::kSpanOutOfBounds);
    CHECK(mask_error("abcdef", {{"s", 2, 2}}) == ErrorCode::kSpanOutOfBounds);
  }
  SUBCASE("adjacent spans are allowed") {
    CHECK(mask_text("abcd", std::vector<Occurrence>{{"s", 0, 2}, {"s", 2, 4}}).masked_text ==
          "[MASK][MASK]");
  }
}

TEST_CASE("collect_contexts on the fixture corpus") {
  const auto corpus = load_corpus(epc::testing::fixture("liver.jsonl"));
  const auto ctx = collect_contexts("liver", corpus);
  REQUIRE(ctx.size() == 3);
  CHECK(ctx[0] == MaskedContext{"2592-1", "Choose beef [MASK] or chicken for iron.", 1});
  CHECK(ctx[1] == MaskedContext{"2592-2", "Kidneys, [MASK], dairy are options.", 1});
  CHECK(ctx[2] == MaskedContext{"3100-2", "Chicken [MASK] will help with anemia.", 1});

  CHECK(collect_contexts("quinoa", corpus).empty());

  const auto two = collect_contexts("liver", corpus, 2);
  REQUIRE(two.size() == 2);
  CHECK(two[0].statement_id == "2592-1");
  CHECK(two[1].statement_id == "2592-2");
}

TEST_CASE("collect_contexts truncates in corpus order") {
  std::string jsonl;
  for (int i = 0; i < 5; ++i) {
    jsonl += R"({"id":"s)" + std::to_string(i) + R"(","text":"Eat kale today.","entities":[]})" "\n";
  }
  const auto corpus = epc::testing::corpus_from_string(jsonl);
  CHECK(collect_contexts("kale", corpus).size() == 5);
  const auto ctx = collect_contexts("kale", corpus, 2);
  REQUIRE(ctx.size() == 2);
  CHECK(ctx[0].statement_id == "s0");
  CHECK(ctx[1].statement_id == "s1");
}

TEST_CASE("masking invariants on random corpora") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    const auto corpus = epc::testing::random_corpus(rng, 25);
    for (const auto& [surface, ids] : corpus.entity_index()) {
      for (const auto& ctx : collect_contexts(surface, corpus)) {
        const auto& original = *std::find_if(
            corpus.statements().begin(), corpus.statements().end(),
            [&](const auto& st) { return st.id == ctx.statement_id; });
        const auto occ = find_occurrences(surface, original);
        REQUIRE(!occ.empty());

        // Length arithmetic.
        std::size_t removed = 0;
        for (const auto& o : occ) removed += o.end - o.start;
        CHECK(ctx.masked_text.size() ==
              original.text.size() + ctx.mask_count * kMaskToken.size() - removed);
        CHECK(ctx.mask_count == occ.size());

        // Mask token count and no residual surface.
        std::size_t tokens = 0;
        for (auto p = ctx.masked_text.find(kMaskToken); p != std::string::npos;
             p = ctx.masked_text.find(kMaskToken, p + 1)) {
          ++tokens;
        }
        CHECK(tokens == ctx.mask_count);
        const AdviceStatement masked{ctx.statement_id, ctx.masked_text, {}};
        CHECK(find_occurrences(surface, masked).empty());

        // Idempotence.
        CHECK(mask_text(ctx.masked_text, find_occurrences(surface, masked)).masked_text ==
              ctx.masked_text);
      }
    }
  }
}
