#include <random>
#include <sstream>

#include "doctest.h"
#include "epc/corpus.hpp"
#include "epc/error.hpp"
#include "epc/text.hpp"
#include "test_util.hpp"

using namespace epc;
using epc::testing::corpus_from_string;

namespace {

ErrorCode load_error(const std::string& jsonl) {
  try {
    corpus_from_string(jsonl);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("class names parse, with VIT as an alias of PHYS") {
  for (auto c : kAllClasses) CHECK(parse_class(class_name(c)) == c);
  CHECK(parse_class("VIT") == EntityClass::kPhys);
  CHECK_FALSE(parse_class("vit").has_value());
  CHECK_FALSE(parse_class("SYMPTOM").has_value());
}

TEST_CASE("normalize_surface folds case and collapses whitespace") {
  CHECK(normalize_surface("  Red \t Wine ") == "red wine");
  CHECK(normalize_surface("LIVER") == "liver");
  CHECK(normalize_surface("   ").empty());
}

TEST_CASE("load_corpus") {
  SUBCASE("empty input") {
    const auto c = corpus_from_string("");
    CHECK(c.empty());
    CHECK(c.entity_index().empty());
  }
  SUBCASE("single record") {
    const auto c = corpus_from_string(
        R"({"id":"a-1","text":"Eat kale.","entities":[{"text":"kale","label":"FOOD"}]})");
    REQUIRE(c.size() == 1);
    CHECK(c.statements()[0].entities[0] == EntityAnnotation{"kale", EntityClass::kFood});
    CHECK(c.entity_index() ==
          std::map<std::string, std::vector<std::string>>{{"kale", {"a-1"}}});
  }
  SUBCASE("VIT label parses to PHYS") {
    const auto c = corpus_from_string(
        R"({"id":"v","text":"Check your pulse.","entities":[{"text":"pulse","label":"VIT"}]})");
    CHECK(c.statements()[0].entities[0].label == EntityClass::kPhys);
  }
  SUBCASE("statements with no entities are legal") {
    const auto c = corpus_from_string(R"({"id":"x","text":"Rest.","entities":[]})");
    CHECK(c.size() == 1);
  }
  SUBCASE("blank lines are skipped") {
    const auto c = corpus_from_string(
        "\n" R"({"id":"x","text":"Rest.","entities":[]})" "\n\n");
    CHECK(c.size() == 1);
  }
  SUBCASE("fixture file") {
    const auto c = load_corpus(epc::testing::fixture("liver.jsonl"));
    CHECK(c.size() == 7);
    CHECK(c.entity_index().at("liver") == std::vector<std::string>{"2592-2"});
    CHECK(c.entity_index().at("chicken liver") == std::vector<std::string>{"3100-2"});
  }
}

TEST_CASE("load_corpus errors") {
  CHECK(load_error(R"({"id":"a","text":"t","entities":[{"text":"x","label":"HERB"}]})") ==
        ErrorCode::kUnknownLabel);
  CHECK(load_error("{not json}") == ErrorCode::kMalformedLine);
  CHECK(load_error(R"({"id":"a","entities":[]})") == ErrorCode::kMalformedLine);
  CHECK(load_error(R"({"id":7,"text":"t","entities":[]})") == ErrorCode::kMalformedLine);
  CHECK(load_error(R"({"id":"a","text":"t","entities":{}})") == ErrorCode::kMalformedLine);
  CHECK(load_error(R"(["a","t"])") == ErrorCode::kMalformedLine);
  CHECK(load_error(R"({"id":"a","text":"t","entities":[]})"
                   "\n"
                   R"({"id":"a","text":"u","entities":[]})") == ErrorCode::kDuplicateId);

  SUBCASE("multi-label annotations are rejected") {
    CHECK(load_error(R"({"id":"a","text":"t","entities":[{"text":"t","label":["FOOD","MED"]}]})") ==
          ErrorCode::kMalformedLine);
    CHECK(load_error(R"({"id":"a","text":"t","entities":[{"text":"t","labels":["FOOD"],"label":"FOOD"}]})") ==
          ErrorCode::kMalformedLine);
  }
  SUBCASE("messages name the line") {
    try {
      corpus_from_string(R"({"id":"a","text":"t","entities":[]})"
                         "\n"
                         R"({"id":"b","text":"t","entities":[{"text":"t","label":"XYZ"}]})");
      FAIL("expected UnknownLabel");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kUnknownLabel);
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
      CHECK(std::string(e.what()).find("XYZ") != std::string::npos);
    }
  }
  SUBCASE("missing file") {
    try {
      load_corpus("/nonexistent/corpus.jsonl");
      FAIL("expected FileNotFound");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kFileNotFound);
    }
  }
}

TEST_CASE("unknown keys produce warnings, not errors") {
  std::istringstream in(
      R"({"id":"a","text":"Eat kale.","source":"web","entities":[{"text":"kale","label":"FOOD","span":[4,8]}]})");
  std::vector<std::string> warnings;
  const auto c = parse_corpus(in, &warnings);
  CHECK(c.size() == 1);
  REQUIRE(warnings.size() == 2);
  CHECK(warnings[0].find("span") != std::string::npos);
  CHECK(warnings[1].find("source") != std::string::npos);
}

TEST_CASE("validate_corpus") {
  SUBCASE("surface missing from its statement") {
    const auto c = corpus_from_string(
        R"({"id":"w","text":"Walk daily.","entities":[{"text":"running","label":"EXER"}]})");
    const auto issues = validate_corpus(c);
    REQUIRE(issues.size() == 1);
    CHECK(issues[0] == ValidationIssue{IssueKind::kSurfaceNotFound, "w", 0, "running"});
  }
  SUBCASE("consistent corpus") {
    CHECK(validate_corpus(load_corpus(epc::testing::fixture("liver.jsonl"))).empty());
  }
  SUBCASE("duplicate annotation") {
    const auto c = corpus_from_string(
        R"({"id":"k","text":"Kale, more kale.","entities":[{"text":"kale","label":"FOOD"},{"text":"Kale","label":"FOOD"}]})");
    const auto issues = validate_corpus(c);
    REQUIRE(issues.size() == 1);
    CHECK(issues[0] == ValidationIssue{IssueKind::kDuplicateAnnotation, "k", 1, "Kale"});
  }
  SUBCASE("same surface with different labels is not a duplicate") {
    const auto c = corpus_from_string(
        R"({"id":"k","text":"Kale.","entities":[{"text":"kale","label":"FOOD"},{"text":"kale","label":"OTH"}]})");
    CHECK(validate_corpus(c).empty());
  }
  SUBCASE("blank surface") {
    const auto c = corpus_from_string(
        R"({"id":"e","text":"Rest.","entities":[{"text":"  ","label":"OTH"}]})");
    const auto issues = validate_corpus(c);
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].kind == IssueKind::kEmptySurface);
  }
  SUBCASE("word boundary applies") {
    const auto c = corpus_from_string(
        R"({"id":"d","text":"Deliver it.","entities":[{"text":"liver","label":"FOOD"}]})");
    CHECK(validate_corpus(c).size() == 1);
  }
}

TEST_CASE("class_distribution") {
  CHECK(class_distribution(Corpus{}).total == 0);
  const auto two_food = corpus_from_string(
      R"({"id":"1","text":"Eat kale.","entities":[{"text":"kale","label":"FOOD"}]})"
      "\n"
      R"({"id":"2","text":"Eat beans.","entities":[{"text":"beans","label":"FOOD"}]})");
  const auto d = class_distribution(two_food);
  CHECK(d.count(EntityClass::kFood) == 2);
  CHECK(d.total == 2);
  for (auto c : kAllClasses) {
    if (c != EntityClass::kFood) CHECK(d.count(c) == 0);
  }

  const auto fixture = class_distribution(load_corpus(epc::testing::fixture("liver.jsonl")));
  CHECK(fixture.count(EntityClass::kFood) == 5);
  CHECK(fixture.count(EntityClass::kDis) == 2);
  CHECK(fixture.count(EntityClass::kPhys) == 1);
  CHECK(fixture.total == 10);
}

TEST_CASE("corpus properties on random corpora") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const auto corpus = epc::testing::random_corpus(rng, 1 + trial % 20);

    // JSON Lines round trip.
    const auto text = serialize_corpus(corpus);
    const auto reloaded = corpus_from_string(text);
    CHECK(reloaded == corpus);
    CHECK(serialize_corpus(reloaded) == text);
    CHECK(reloaded.digest() == corpus.digest());

    // The index is a function of the statements alone.
    CHECK(build_entity_index(corpus.statements()) == corpus.entity_index());

    std::size_t direct = 0;
    for (const auto& st : corpus.statements()) {
      for (const auto& e : st.entities) {
        ++direct;
        const auto& ids = corpus.entity_index().at(normalize_surface(e.surface));
        CHECK(std::find(ids.begin(), ids.end(), st.id) != ids.end());
      }
    }
    const auto dist = class_distribution(corpus);
    CHECK(dist.total == direct);
    std::size_t sum = 0;
    for (auto n : dist.counts) sum += n;
    CHECK(sum == dist.total);
  }
}
