#ifndef ESSAYMARK_SPANS_HPP
#define ESSAYMARK_SPANS_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "essaymark/types.hpp"

namespace essaymark {

// Essay text with non-overlapping component and error spans. Every error
// span lies entirely inside one component or entirely outside all of them;
// normalize() establishes this.
struct AnnotatedDoc {
  std::string essay_id;
  std::string text;  // UTF-8, offsets below count Unicode scalar values
  std::vector<ComponentSpan> components;
  std::vector<ErrorSpan> errors;

  bool operator==(const AnnotatedDoc&) const = default;
};

struct SpanError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OverlappingComponents : SpanError {
  explicit OverlappingComponents(const std::string& detail)
      : SpanError("overlapping components: " + detail) {}
};
struct NotNormalized : SpanError {
  explicit NotNormalized(const std::string& detail)
      : SpanError("document not normalized: " + detail) {}
};
struct MalformedMarkup : SpanError {
  std::size_t position;
  MalformedMarkup(std::size_t pos, const std::string& detail)
      : SpanError("malformed markup at " + std::to_string(pos) + ": " + detail),
        position(pos) {}
};
struct UnknownTag : SpanError {
  std::string tag;
  explicit UnknownTag(const std::string& name)
      : SpanError("unknown tag: " + name), tag(name) {}
};

// Sorts spans, splits error spans at component boundaries (an error crossing
// a boundary becomes up to three pieces with the same label), drops empty
// pieces. Overlapping components throw; overlapping error spans are clipped
// left-to-right like gold-span repair. Idempotent.
AnnotatedDoc normalize(std::string essay_id, std::string text,
                       std::vector<ComponentSpan> components,
                       std::vector<ErrorSpan> errors);
AnnotatedDoc normalize(const AnnotatedDoc& doc);

bool is_normalized(const AnnotatedDoc& doc);

enum class XmlMode { Fragment, Document };

// Inline XML with the 10-tag vocabulary. Only & < > are escaped in content.
// Document mode wraps the output in an <essay id="..."> root.
std::string embed_xml(const AnnotatedDoc& doc, XmlMode mode = XmlMode::Fragment);

// Inverse of embed_xml: recovers the text and both span lists with exact
// offsets. essay_id comes from the root attribute in document mode and is
// empty in fragment mode unless supplied.
AnnotatedDoc parse_xml(const std::string& s, XmlMode mode = XmlMode::Fragment,
                       const std::string& essay_id = "");

std::string escape_text(const std::string& s);

}  // namespace essaymark

#endif
