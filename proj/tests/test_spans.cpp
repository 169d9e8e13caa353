#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "essaymark/spans.hpp"
#include "essaymark/utf8.hpp"

using namespace essaymark;

namespace {

ComponentSpan comp(std::size_t s, std::size_t e, ComponentLabel l,
                   std::string id = "") {
  return ComponentSpan{std::move(id), s, e, l};
}

ErrorSpan err(std::size_t s, std::size_t e, ErrorLabel l,
              std::string id = "") {
  return ErrorSpan{std::move(id), s, e, l};
}

// Random normalized doc: ASCII + a few multibyte scalars + markup-sensitive
// characters, non-overlapping components, errors nested in or out of them.
AnnotatedDoc random_doc(std::mt19937& rng) {
  static const std::vector<std::string> alphabet = {
      "a", "b", "c", " ", " ", "&", "<", ">", "\"", "'", "\xc3\xa9",
      "\xe2\x82\xac", ".", "\n"};
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> len_dist(20, 60);
  const int n = len_dist(rng);
  std::string text;
  for (int i = 0; i < n; ++i) text += alphabet[pick(rng)];
  const std::size_t scalars = utf8::length(text);

  std::vector<ComponentSpan> comps;
  std::uniform_int_distribution<int> label7(0, 6);
  std::size_t cursor = 0;
  while (cursor + 2 < scalars) {
    std::uniform_int_distribution<std::size_t> gap(0, 3);
    cursor += gap(rng);
    if (cursor + 1 >= scalars) break;
    std::uniform_int_distribution<std::size_t> width(1, scalars - cursor);
    std::size_t w = std::min<std::size_t>(width(rng), 10);
    comps.push_back(comp(cursor, cursor + w, kComponentLabels[label7(rng)]));
    cursor += w;
  }

  std::vector<ErrorSpan> errs;
  std::uniform_int_distribution<int> label3(0, 2);
  std::uniform_int_distribution<int> count(0, 4);
  const int m = count(rng);
  std::uniform_int_distribution<std::size_t> pos(0, scalars);
  for (int i = 0; i < m; ++i) {
    std::size_t a = pos(rng), b = pos(rng);
    if (a > b) std::swap(a, b);
    errs.push_back(err(a, std::min(b, a + 5), kErrorLabels[label3(rng)]));
  }
  return normalize("e", std::move(text), std::move(comps), std::move(errs));
}

}  // namespace

TEST_CASE("normalize splits an error at a component boundary") {
  std::string text(30, 'x');
  auto doc = normalize("e", text, {comp(10, 20, ComponentLabel::Claim)},
                       {err(8, 25, ErrorLabel::Grammar)});
  REQUIRE(doc.errors.size() == 3);
  CHECK(doc.errors[0] == err(8, 10, ErrorLabel::Grammar, "e"));
  CHECK(doc.errors[1] == err(10, 20, ErrorLabel::Grammar, "e"));
  CHECK(doc.errors[2] == err(20, 25, ErrorLabel::Grammar, "e"));
}

TEST_CASE("normalize clips overlapping errors left and drops empties") {
  std::string text(20, 'x');
  auto doc = normalize("e", text, {},
                       {err(0, 10, ErrorLabel::Spelling),
                        err(5, 8, ErrorLabel::Grammar),  // swallowed
                        err(8, 14, ErrorLabel::PunctOrth)});
  REQUIRE(doc.errors.size() == 2);
  CHECK(doc.errors[0] == err(0, 10, ErrorLabel::Spelling, "e"));
  CHECK(doc.errors[1] == err(10, 14, ErrorLabel::PunctOrth, "e"));
}

TEST_CASE("normalize rejects overlapping components") {
  std::string text(20, 'x');
  CHECK_THROWS_AS(normalize("e", text,
                            {comp(0, 10, ComponentLabel::Lead),
                             comp(5, 15, ComponentLabel::Claim)},
                            {}),
                  OverlappingComponents);
}

TEST_CASE("normalize drops empty components and is idempotent") {
  std::string text(20, 'x');
  auto doc = normalize("e", text,
                       {comp(5, 5, ComponentLabel::Claim),
                        comp(0, 4, ComponentLabel::Lead)},
                       {err(1, 3, ErrorLabel::Spelling)});
  CHECK(doc.components.size() == 1);
  CHECK(is_normalized(doc));
  CHECK(normalize(doc) == doc);
}

TEST_CASE("embed produces inline tags with errors nested inside components") {
  auto doc = normalize(
      "e", "Cars have advanteges and more.",
      {comp(0, 24, ComponentLabel::Claim)}, {err(10, 20, ErrorLabel::Spelling)});
  CHECK(embed_xml(doc) ==
        "<Claim>Cars have <Spelling>advanteges</Spelling> and</Claim> more.");
}

TEST_CASE("only the three markup characters are escaped") {
  auto doc = normalize("e", "a < b & c > d \"quoted\"", {}, {});
  CHECK(embed_xml(doc) == "a &lt; b &amp; c &gt; d \"quoted\"");
  CHECK(parse_xml("a &lt; b &amp; c &gt; d \"quoted\"").text ==
        "a < b & c > d \"quoted\"");
}

TEST_CASE("document mode wraps in an essay root and recovers the id") {
  auto doc = normalize("essay-7", "Short text.",
                       {comp(0, 5, ComponentLabel::Lead)}, {});
  auto xml = embed_xml(doc, XmlMode::Document);
  CHECK(xml.substr(0, 17) == "<essay id=\"essay-");
  auto back = parse_xml(xml, XmlMode::Document);
  CHECK(back == doc);
}

TEST_CASE("parse rejects unknown tags and malformed markup") {
  CHECK_THROWS_AS(parse_xml("<Bogus>x</Bogus>"), UnknownTag);
  CHECK_THROWS_AS(parse_xml("<Claim>x"), MalformedMarkup);
  CHECK_THROWS_AS(parse_xml("<Claim>x</Lead>"), MalformedMarkup);
  CHECK_THROWS_AS(parse_xml("x</Claim>"), MalformedMarkup);
  CHECK_THROWS_AS(parse_xml("a & b"), MalformedMarkup);  // bare ampersand
  // components may not nest in components
  CHECK_THROWS_AS(parse_xml("<Claim><Lead>x</Lead></Claim>"), MalformedMarkup);
}

TEST_CASE("malformed markup reports a position") {
  try {
    parse_xml("abcd</Claim>");
    FAIL("expected MalformedMarkup");
  } catch (const MalformedMarkup& e) {
    CHECK(e.position == 4);
  }
}

TEST_CASE("embed requires a normalized doc") {
  AnnotatedDoc doc;
  doc.text = "0123456789";
  doc.components = {comp(0, 6, ComponentLabel::Lead)};
  doc.errors = {err(4, 8, ErrorLabel::Grammar)};  // crosses the boundary
  CHECK_THROWS_AS(embed_xml(doc), NotNormalized);
}

TEST_CASE("round-trip on a worked multi-span example") {
  const std::string text =
      "Driving is fun. I beleive cars have advanteges, like speed. "
      "In conclusion cars are grate.";
  auto doc = normalize("e1", text,
                       {comp(0, 15, ComponentLabel::Lead),
                        comp(16, 59, ComponentLabel::Claim),
                        comp(60, 89, ComponentLabel::ConcludingStatement)},
                       {err(18, 25, ErrorLabel::Spelling),
                        err(36, 46, ErrorLabel::Spelling),
                        err(83, 88, ErrorLabel::Spelling)});
  auto xml = embed_xml(doc);
  CHECK(xml.find("<Spelling>beleive</Spelling>") != std::string::npos);
  CHECK(parse_xml(xml, XmlMode::Fragment, "e1") == doc);
}

TEST_CASE("round-trip property over random normalized docs") {
  std::mt19937 rng(20260823);
  for (int i = 0; i < 300; ++i) {
    auto doc = random_doc(rng);
    CAPTURE(i);
    CAPTURE(doc.text);
    auto xml = embed_xml(doc);
    auto back = parse_xml(xml, XmlMode::Fragment, doc.essay_id);
    CHECK(back == doc);
    auto xml_doc = embed_xml(doc, XmlMode::Document);
    CHECK(parse_xml(xml_doc, XmlMode::Document) == doc);
    CHECK(normalize(doc) == doc);  // random_doc output already normalized
  }
}

TEST_CASE("zero-width error spans survive the round trip") {
  auto doc = normalize("e", "word pair here",
                       {comp(0, 9, ComponentLabel::Claim)},
                       {err(5, 5, ErrorLabel::Grammar)});
  REQUIRE(doc.errors.size() == 1);
  auto back = parse_xml(embed_xml(doc), XmlMode::Fragment, "e");
  CHECK(back == doc);
}

TEST_CASE("offsets in the round trip count scalars") {
  // é and € are single scalars
  const std::string text = "caf\xc3\xa9 costs \xe2\x82\xac" "5 today";
  auto doc = normalize("e", text, {comp(0, 4, ComponentLabel::Lead)},
                       {err(11, 13, ErrorLabel::PunctOrth)});
  auto back = parse_xml(embed_xml(doc), XmlMode::Fragment, "e");
  CHECK(back == doc);
  CHECK(back.errors[0].start == 11);
}
