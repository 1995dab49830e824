#include "psforge/taggin.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "psforge/errors.hpp"
#include "support/test_support.hpp"

using namespace psforge;

namespace {

EpsDocument doc_with(const std::vector<std::string>& labels) {
  return parse_eps(testsup::labels_document(labels));
}

RulePrecursor target(std::size_t index, std::string latex = "$x$", RuleOptions opts = {}) {
  RulePrecursor p;
  p.primitive_index = index;
  p.latex = std::move(latex);
  p.options = std::move(opts);
  return p;
}

}  // namespace

TEST_SUITE("taggin") {

TEST_CASE("tag validity") {
  CHECK(is_valid_tag("aA"));
  CHECK(is_valid_tag("x1"));
  CHECK(is_valid_tag("Z9z"));
  CHECK(!is_valid_tag(""));
  CHECK(!is_valid_tag("a A"));
  CHECK(!is_valid_tag("a-b"));
  CHECK(!is_valid_tag("a_b"));
}

TEST_CASE("allocation order and level boundaries") {
  CHECK(allocate_tag(0).value == "aA");
  CHECK(allocate_tag(1).value == "aB");
  CHECK(allocate_tag(25).value == "aZ");
  CHECK(allocate_tag(26).value == "bA");
  CHECK(allocate_tag(675).value == "zZ");
  CHECK(allocate_tag(676).value == "aAA");
  CHECK(allocate_tag(677).value == "aAB");
  CHECK(allocate_tag(676 + 17575).value == "zZZ");
  CHECK(allocate_tag(676 + 17576).value == "aAAA");
}

TEST_CASE("allocation is injective and letters-only") {
  std::set<std::string> seen;
  for (std::size_t i = 0; i < 20000; ++i) {
    const Tag tag = allocate_tag(i);
    CHECK(is_valid_tag(tag.value));
    for (char c : tag.value) {
      const bool letter = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
      CHECK(letter);
    }
    CHECK(seen.insert(tag.value).second);
  }
}

TEST_CASE("basic substitution rewrites text and records the rule") {
  EpsDocument doc = doc_with({"hello"});
  SubstitutionResult result = substitute_labels(doc, {target(0, "$h$")});
  REQUIRE(result.map.entries.size() == 1);
  const TagMapEntry& entry = result.map.entries[0];
  CHECK(entry.tag.value == "aA");
  CHECK(entry.original.text == "hello");
  CHECK(entry.rule.latex == "$h$");
  CHECK(entry.rule.texpos.str() == "Bl");
  CHECK(entry.rule.pspos.str() == "Bl");
  CHECK(result.doc.text_primitives()[0]->text == "aA");
  CHECK(serialize_eps(result.doc).find("(aA) show") != std::string::npos);
}

TEST_CASE("pspos copies texpos when unset") {
  RuleOptions opts;
  opts.texpos = AlignCode::parse("tc");
  EpsDocument doc = doc_with({"hello"});
  SubstitutionResult result = substitute_labels(doc, {target(0, "$h$", opts)});
  CHECK(result.map.entries[0].rule.texpos.str() == "tc");
  CHECK(result.map.entries[0].rule.pspos.str() == "tc");

  opts.pspos = AlignCode::parse("cc");
  result = substitute_labels(doc, {target(0, "$h$", opts)});
  CHECK(result.map.entries[0].rule.pspos.str() == "cc");
}

TEST_CASE("identical text with identical rules shares one tag") {
  EpsDocument doc = doc_with({"0", "1", "0"});
  SubstitutionResult result =
      substitute_labels(doc, {target(0, "$0$"), target(1, "$1$"), target(2, "$0$")});
  REQUIRE(result.map.entries.size() == 2);
  CHECK(result.map.entries[0].tag.value == "aA");
  CHECK(result.map.entries[0].primitive_indices == std::vector<std::size_t>{0, 2});
  CHECK(result.map.entries[1].tag.value == "aB");
  auto prims = result.doc.text_primitives();
  CHECK(prims[0]->text == "aA");
  CHECK(prims[1]->text == "aB");
  CHECK(prims[2]->text == "aA");
}

TEST_CASE("same text with different options splits the group") {
  RuleOptions tc;
  tc.texpos = AlignCode::parse("tc");
  EpsDocument doc = doc_with({"0", "0"});
  SubstitutionResult result =
      substitute_labels(doc, {target(0, "$0$"), target(1, "$0$", tc)});
  REQUIRE(result.map.entries.size() == 2);
  CHECK(result.map.entries[0].tag.value == "aA");
  CHECK(result.map.entries[1].tag.value == "aB");
}

TEST_CASE("tags avoid surviving labels") {
  EpsDocument doc = doc_with({"aA", "target"});
  SubstitutionResult result = substitute_labels(doc, {target(1)});
  CHECK(result.map.entries[0].tag.value == "aB");
  CHECK(result.doc.text_primitives()[0]->text == "aA");
}

TEST_CASE("tags avoid string literals inside opaque content") {
  const std::string bytes =
      "%!PS-Adobe-3.0 EPSF-3.0\n%%BoundingBox: 0 0 100 100\n%%EndComments\n"
      "/p { (aA) show } def\n"
      "10 10 moveto\n(label) show\n";
  SubstitutionResult result = substitute_labels(parse_eps(bytes), {target(0)});
  CHECK(result.map.entries[0].tag.value == "aB");
}

TEST_CASE("explicit tags are honored and collisions rejected") {
  EpsDocument doc = doc_with({"one", "two"});
  RuleOptions opts;
  opts.tag = "gA";
  SubstitutionResult result = substitute_labels(doc, {target(0, "$1$", opts), target(1)});
  CHECK(result.map.entries[0].tag.value == "gA");
  CHECK(result.map.entries[1].tag.value == "aA");

  // explicit tag equal to a surviving label
  EpsDocument survivors = doc_with({"gA", "two"});
  CHECK_THROWS_AS(substitute_labels(survivors, {target(1, "$2$", opts)}), Error);
  try {
    substitute_labels(survivors, {target(1, "$2$", opts)});
    FAIL("expected TagCollision");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::TagCollision);
  }

  // the same explicit tag on two different rule groups
  RuleOptions other = opts;
  other.scale = 2.0;
  try {
    substitute_labels(doc, {target(0, "$1$", opts), target(1, "$2$", other)});
    FAIL("expected TagCollision");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::TagCollision);
  }

  // malformed explicit tag
  RuleOptions bad;
  bad.tag = "a b";
  try {
    substitute_labels(doc, {target(0, "$1$", bad)});
    FAIL("expected ParseFailure");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::ParseFailure);
  }
}

TEST_CASE("auto allocation skips explicitly requested tags") {
  EpsDocument doc = doc_with({"one", "two"});
  RuleOptions opts;
  opts.tag = "aA";
  SubstitutionResult result = substitute_labels(doc, {target(0), target(1, "$2$", opts)});
  CHECK(result.map.entries[0].tag.value == "aB");
  CHECK(result.map.entries[1].tag.value == "aA");
}

TEST_CASE("out-of-range precursor index throws") {
  EpsDocument doc = doc_with({"only"});
  CHECK_THROWS_AS(substitute_labels(doc, {target(3)}), Error);
}

TEST_CASE("re-running on tagged output is a no-op") {
  EpsDocument doc = doc_with({"alpha", "beta", "alpha", "keep"});
  const std::vector<RulePrecursor> precursors = {target(0), target(1, "$b$"), target(2)};
  SubstitutionResult first = substitute_labels(doc, precursors);
  const std::string once = serialize_eps(first.doc);
  SubstitutionResult second = substitute_labels(first.doc, precursors);
  CHECK(serialize_eps(second.doc) == once);
}

TEST_CASE("randomized label sets keep every guarantee") {
  std::mt19937 rng(424242);
  for (int round = 0; round < 300; ++round) {
    const int n = std::uniform_int_distribution<int>(1, 14)(rng);
    std::vector<std::string> labels;
    for (int i = 0; i < n; ++i) {
      if (!labels.empty() && std::bernoulli_distribution(0.2)(rng))
        labels.push_back(labels[std::uniform_int_distribution<std::size_t>(
            0, labels.size() - 1)(rng)]);
      else
        labels.push_back(testsup::random_label(rng));
    }

    EpsDocument doc = doc_with(labels);
    const std::size_t total = doc.text_primitives().size();
    std::vector<RulePrecursor> precursors;
    for (std::size_t i = 0; i < total; ++i) {
      if (std::bernoulli_distribution(0.7)(rng)) {
        RuleOptions opts;
        if (std::bernoulli_distribution(0.3)(rng)) opts.texpos = AlignCode::parse("tc");
        precursors.push_back(
            target(i, std::bernoulli_distribution(0.5)(rng) ? "$x$" : "$y$", opts));
      }
    }
    if (precursors.empty()) continue;

    SubstitutionResult result = substitute_labels(doc, precursors);
    CAPTURE(round);

    // uniqueness + letters-only
    std::set<std::string> tags;
    for (const TagMapEntry& entry : result.map.entries) {
      CHECK(tags.insert(entry.tag.value).second);
      for (char c : entry.tag.value)
        CHECK(((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')));
    }

    // no tag equals a surviving label or any other untouched string
    std::set<std::size_t> touched;
    for (const TagMapEntry& entry : result.map.entries)
      touched.insert(entry.primitive_indices.begin(), entry.primitive_indices.end());
    auto prims = result.doc.text_primitives();
    for (std::size_t i = 0; i < prims.size(); ++i)
      if (!touched.count(i)) CHECK(!tags.count(prims[i]->text));

    // idempotence on the tagged output
    const std::string once = serialize_eps(result.doc);
    CHECK(serialize_eps(substitute_labels(result.doc, precursors).doc) == once);
  }
}

}  // TEST_SUITE
