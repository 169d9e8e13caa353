#include "essaymark/spans.hpp"

#include <algorithm>

#include "essaymark/utf8.hpp"

namespace essaymark {

namespace {

bool span_order_comp(const ComponentSpan& a, const ComponentSpan& b) {
  return a.start < b.start || (a.start == b.start && a.end < b.end);
}
bool span_order_err(const ErrorSpan& a, const ErrorSpan& b) {
  return a.start < b.start || (a.start == b.start && a.end < b.end);
}

// Text regions alternating outside/inside components, in document order.
struct Region {
  std::size_t lo, hi;
  int component = -1;  // index into doc.components, -1 = outside
};

std::vector<Region> make_regions(const AnnotatedDoc& doc, std::size_t len) {
  std::vector<Region> regions;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < doc.components.size(); ++i) {
    const auto& c = doc.components[i];
    regions.push_back({pos, c.start, -1});
    regions.push_back({c.start, c.end, static_cast<int>(i)});
    pos = c.end;
  }
  regions.push_back({pos, len, -1});
  return regions;
}

// Region owning an error span. Zero-width spans attach to the first region
// they can sit strictly inside of; a span at end-of-text goes to the last.
std::size_t region_of(const std::vector<Region>& regions, std::size_t s,
                      std::size_t e) {
  if (s == e) {
    for (std::size_t i = 0; i < regions.size(); ++i)
      if (regions[i].lo <= s && s < regions[i].hi) return i;
    return regions.size() - 1;
  }
  for (std::size_t i = 0; i < regions.size(); ++i)
    if (regions[i].lo <= s && e <= regions[i].hi) return i;
  return regions.size();  // crosses a boundary
}

}  // namespace

AnnotatedDoc normalize(std::string essay_id, std::string text,
                       std::vector<ComponentSpan> components,
                       std::vector<ErrorSpan> errors) {
  const std::size_t len = utf8::length(text);

  std::stable_sort(components.begin(), components.end(), span_order_comp);
  std::vector<ComponentSpan> comps;
  for (auto& c : components) {
    if (c.start >= c.end) continue;  // empty components carry no content
    if (c.end > len)
      throw SpanError("component span out of bounds");
    if (!comps.empty() && c.start < comps.back().end)
      throw OverlappingComponents(
          "[" + std::to_string(comps.back().start) + "," +
          std::to_string(comps.back().end) + ") and [" +
          std::to_string(c.start) + "," + std::to_string(c.end) + ")");
    c.essay_id = essay_id;
    comps.push_back(std::move(c));
  }

  std::stable_sort(errors.begin(), errors.end(), span_order_err);
  std::vector<ErrorSpan> clipped;
  for (auto& e : errors) {
    if (e.end > len || e.start > e.end)
      throw SpanError("error span out of bounds");
    e.essay_id = essay_id;
    if (!clipped.empty() && e.start < clipped.back().end) {
      e.start = clipped.back().end;
      if (e.start >= e.end) continue;
    }
    clipped.push_back(std::move(e));
  }

  // Split error spans at component boundaries.
  std::vector<std::size_t> boundaries;
  for (const auto& c : comps) {
    boundaries.push_back(c.start);
    boundaries.push_back(c.end);
  }
  std::vector<ErrorSpan> split;
  for (const auto& e : clipped) {
    if (e.start == e.end) {
      split.push_back(e);
      continue;
    }
    std::vector<std::size_t> cuts = {e.start};
    for (std::size_t b : boundaries)
      if (b > e.start && b < e.end) cuts.push_back(b);
    cuts.push_back(e.end);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      split.push_back({e.essay_id, cuts[i], cuts[i + 1], e.label});
  }
  std::stable_sort(split.begin(), split.end(), span_order_err);

  AnnotatedDoc doc;
  doc.essay_id = std::move(essay_id);
  doc.text = std::move(text);
  doc.components = std::move(comps);
  doc.errors = std::move(split);
  return doc;
}

AnnotatedDoc normalize(const AnnotatedDoc& doc) {
  return normalize(doc.essay_id, doc.text, doc.components, doc.errors);
}

bool is_normalized(const AnnotatedDoc& doc) {
  try {
    return normalize(doc) == doc;
  } catch (const SpanError&) {
    return false;
  }
}

std::string escape_text(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

namespace {

std::string escape_attr(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::string embed_xml(const AnnotatedDoc& doc, XmlMode mode) {
  AnnotatedDoc norm;
  try {
    norm = normalize(doc);
  } catch (const SpanError& e) {
    throw NotNormalized(e.what());
  }
  if (!(norm == doc)) throw NotNormalized("spans not in normal form");

  const std::u32string text = utf8::decode(doc.text);
  const auto regions = make_regions(doc, text.size());

  // errors grouped per region, document order preserved
  std::vector<std::vector<const ErrorSpan*>> region_errors(regions.size());
  for (const auto& e : doc.errors) {
    std::size_t r = region_of(regions, e.start, e.end);
    if (r >= regions.size()) throw NotNormalized("error crosses boundary");
    region_errors[r].push_back(&e);
  }

  std::string out;
  auto emit_text = [&](std::size_t lo, std::size_t hi) {
    out += escape_text(utf8::encode(text.substr(lo, hi - lo)));
  };

  if (mode == XmlMode::Document)
    out += "<essay id=\"" + escape_attr(doc.essay_id) + "\">";

  for (std::size_t r = 0; r < regions.size(); ++r) {
    const auto& reg = regions[r];
    if (reg.component >= 0)
      out += "<" + std::string(to_string(doc.components[reg.component].label)) +
             ">";
    std::size_t pos = reg.lo;
    for (const ErrorSpan* e : region_errors[r]) {
      emit_text(pos, e->start);
      const std::string tag(to_string(e->label));
      out += "<" + tag + ">";
      emit_text(e->start, e->end);
      out += "</" + tag + ">";
      pos = e->end;
    }
    emit_text(pos, reg.hi);
    if (reg.component >= 0)
      out += "</" +
             std::string(to_string(doc.components[reg.component].label)) + ">";
  }

  if (mode == XmlMode::Document) out += "</essay>";
  return out;
}

namespace {

class XmlParser {
 public:
  XmlParser(std::u32string input, std::string essay_id)
      : in_(std::move(input)) {
    doc_.essay_id = std::move(essay_id);
  }

  AnnotatedDoc run(XmlMode mode) {
    if (mode == XmlMode::Document) {
      parse_root_open();
      std::string close = parse_content(false);
      if (close != "essay")
        throw MalformedMarkup(last_close_at_,
                              "expected </essay>, got </" + close + ">");
      skip_ws();
      if (i_ != in_.size())
        throw MalformedMarkup(i_, "trailing content after root");
    } else {
      std::string close = parse_content(false);
      if (!close.empty())
        throw MalformedMarkup(last_close_at_,
                              "unmatched closing tag </" + close + ">");
    }
    doc_.text = utf8::encode(text_);
    for (auto& c : doc_.components) c.essay_id = doc_.essay_id;
    for (auto& e : doc_.errors) e.essay_id = doc_.essay_id;
    return std::move(doc_);
  }

 private:
  [[noreturn]] void fail(const std::string& msg) {
    throw MalformedMarkup(i_, msg);
  }

  bool eof() const { return i_ >= in_.size(); }
  char32_t peek() const { return in_[i_]; }

  void skip_ws() {
    while (!eof() && (peek() == U' ' || peek() == U'\t' || peek() == U'\n' ||
                      peek() == U'\r'))
      ++i_;
  }

  void expect(char32_t c) {
    if (eof() || peek() != c) fail("expected '" + utf8::encode(c) + "'");
    ++i_;
  }

  std::string read_name() {
    std::string name;
    while (!eof()) {
      char32_t c = peek();
      if ((c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z') ||
          (c >= U'0' && c <= U'9')) {
        name += static_cast<char>(c);
        ++i_;
      } else {
        break;
      }
    }
    if (name.empty()) fail("empty tag name");
    return name;
  }

  char32_t read_entity() {
    std::size_t at = i_;
    ++i_;  // '&'
    std::string name;
    while (!eof() && peek() != U';' && name.size() < 8) {
      name += static_cast<char>(peek());
      ++i_;
    }
    if (eof() || peek() != U';')
      throw MalformedMarkup(at, "unterminated entity");
    ++i_;
    if (name == "amp") return U'&';
    if (name == "lt") return U'<';
    if (name == "gt") return U'>';
    if (name == "quot") return U'"';
    if (name == "apos") return U'\'';
    throw MalformedMarkup(at, "unknown entity &" + name + ";");
  }

  void parse_root_open() {
    skip_ws();
    expect(U'<');
    std::string name = read_name();
    if (name != "essay") fail("expected <essay> root, got <" + name + ">");
    skip_ws();
    while (!eof() && peek() != U'>') {
      std::string attr = read_name();
      expect(U'=');
      expect(U'"');
      std::u32string value;
      while (!eof() && peek() != U'"') {
        if (peek() == U'&')
          value.push_back(read_entity());
        else {
          value.push_back(peek());
          ++i_;
        }
      }
      expect(U'"');
      if (attr == "id")
        doc_.essay_id = utf8::encode(value);
      else
        fail("unexpected attribute '" + attr + "' on root");
      skip_ws();
    }
    expect(U'>');
  }

  // Parses until EOF (returns "") or a closing tag (returns its name).
  // inside_component: component tags may not nest.
  std::string parse_content(bool inside_component) {
    while (!eof()) {
      char32_t c = peek();
      if (c == U'&') {
        text_.push_back(read_entity());
      } else if (c == U'<') {
        std::size_t at = i_;
        ++i_;
        if (!eof() && peek() == U'/') {
          ++i_;
          std::string name = read_name();
          expect(U'>');
          last_close_at_ = at;
          return name;
        }
        std::string name = read_name();
        if (eof() || peek() != U'>')
          throw MalformedMarkup(at, "malformed tag <" + name);
        ++i_;
        if (auto comp = component_label_from_string(name);
            comp && name == std::string(to_string(*comp))) {
          if (inside_component)
            throw MalformedMarkup(at, "nested component <" + name + ">");
          std::size_t start = text_.size();
          std::string close = parse_content(true);
          if (close != name)
            throw MalformedMarkup(at, "<" + name + "> closed by </" + close +
                                          ">");
          // empty elements carry no content; drop like normalize does
          if (text_.size() > start)
            doc_.components.push_back({"", start, text_.size(), *comp});
        } else if (auto err = error_label_from_string(name);
                   err && name == std::string(to_string(*err))) {
          std::size_t start = text_.size();
          parse_error_content(name, at);
          doc_.errors.push_back({"", start, text_.size(), *err});
        } else {
          throw UnknownTag(name);
        }
      } else {
        text_.push_back(c);
        ++i_;
      }
    }
    return "";
  }

  // Error elements hold plain text only.
  void parse_error_content(const std::string& tag, std::size_t open_at) {
    while (!eof()) {
      char32_t c = peek();
      if (c == U'&') {
        text_.push_back(read_entity());
      } else if (c == U'<') {
        std::size_t at = i_;
        ++i_;
        if (eof() || peek() != U'/')
          throw MalformedMarkup(at, "tag nested inside <" + tag + ">");
        ++i_;
        std::string name = read_name();
        expect(U'>');
        if (name != tag)
          throw MalformedMarkup(at,
                                "<" + tag + "> closed by </" + name + ">");
        return;
      } else {
        text_.push_back(c);
        ++i_;
      }
    }
    throw MalformedMarkup(open_at, "unclosed <" + tag + ">");
  }

  std::u32string in_;
  std::size_t i_ = 0;
  std::size_t last_close_at_ = 0;
  std::u32string text_;
  AnnotatedDoc doc_;
};

}  // namespace

AnnotatedDoc parse_xml(const std::string& s, XmlMode mode,
                       const std::string& essay_id) {
  XmlParser parser(utf8::decode(s), essay_id);
  return parser.run(mode);
}

}  // namespace essaymark
