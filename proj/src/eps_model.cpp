#include "psforge/eps_model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <optional>

#include "psforge/errors.hpp"

namespace psforge {

namespace {

bool is_ps_whitespace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\0';
}

// Delimiters end a regular token in PostScript.
bool is_ps_delimiter(char c) {
  return c == '(' || c == ')' || c == '<' || c == '>' || c == '[' || c == ']' || c == '{' ||
         c == '}' || c == '/' || c == '%';
}

bool is_regular(char c) { return !is_ps_whitespace(c) && !is_ps_delimiter(c); }

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

std::string format_ps_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct Token {
  enum class Kind { Number, String, Name, LBrace, RBrace, LBracket, RBracket, Word, Other };
  Kind kind = Kind::Other;
  std::size_t begin = 0;
  std::size_t end = 0;
  double number = 0.0;
  std::string text;  // decoded content for String, raw word for Word/Name
};

// Tokenizer over the EPS body. Comments are skipped; the DSC data sections
// (%%BeginPreview/Data/Binary) are skipped wholesale so binary payloads can
// never be misread as syntax.
class Tokenizer {
 public:
  Tokenizer(std::string_view bytes, std::size_t start) : bytes_(bytes), pos_(start) {}

  std::optional<Token> next() {
    for (;;) {
      skip_whitespace();
      if (pos_ >= bytes_.size()) return std::nullopt;
      if (bytes_[pos_] == '%') {
        skip_comment();
        continue;
      }
      break;
    }

    const char c = bytes_[pos_];
    if (c == '(') return string_token();
    if (c == '{') return single(Token::Kind::LBrace);
    if (c == '}') return single(Token::Kind::RBrace);
    if (c == '[') return single(Token::Kind::LBracket);
    if (c == ']') return single(Token::Kind::RBracket);
    if (c == '/') return name_token();
    if (c == '<' || c == '>' || c == ')') return single(Token::Kind::Other);
    return word_token();
  }

 private:
  void skip_whitespace() {
    while (pos_ < bytes_.size() && is_ps_whitespace(bytes_[pos_])) ++pos_;
  }

  std::string_view rest_of_line() {
    const std::size_t eol = bytes_.find('\n', pos_);
    const std::size_t end = eol == std::string_view::npos ? bytes_.size() : eol;
    return bytes_.substr(pos_, end - pos_);
  }

  void skip_line() {
    const std::size_t eol = bytes_.find('\n', pos_);
    pos_ = eol == std::string_view::npos ? bytes_.size() : eol + 1;
  }

  void skip_until_line_starting(std::string_view marker) {
    while (pos_ < bytes_.size()) {
      if (starts_with(bytes_.substr(pos_), marker)) {
        skip_line();
        return;
      }
      skip_line();
    }
  }

  void skip_comment() {
    const std::string_view line = rest_of_line();
    if (starts_with(line, "%%BeginPreview")) {
      skip_line();
      skip_until_line_starting("%%EndPreview");
      return;
    }
    if (starts_with(line, "%%BeginData:")) {
      skip_data_section(line, "%%EndData");
      return;
    }
    if (starts_with(line, "%%BeginBinary:")) {
      skip_data_section(line, "%%EndBinary");
      return;
    }
    skip_line();
  }

  // %%BeginData: <count> [Hex|Binary|ASCII] [Bytes|Lines]
  void skip_data_section(std::string_view line, std::string_view end_marker) {
    std::size_t colon = line.find(':');
    std::string args(line.substr(colon + 1));
    char* endp = nullptr;
    const long long count = std::strtoll(args.c_str(), &endp, 10);
    skip_line();
    if (endp != args.c_str() && count >= 0) {
      const bool lines = args.find("Lines") != std::string::npos;
      if (lines) {
        for (long long i = 0; i < count && pos_ < bytes_.size(); ++i) skip_line();
      } else {
        pos_ = std::min(bytes_.size(), pos_ + static_cast<std::size_t>(count));
      }
    }
    skip_until_line_starting(end_marker);
  }

  Token single(Token::Kind kind) {
    Token t;
    t.kind = kind;
    t.begin = pos_;
    t.end = ++pos_;
    return t;
  }

  Token string_token() {
    Token t;
    t.kind = Token::Kind::String;
    t.begin = pos_;
    ++pos_;  // consume '('
    int depth = 1;
    std::string out;
    while (pos_ < bytes_.size()) {
      char c = bytes_[pos_++];
      if (c == '\\') {
        if (pos_ >= bytes_.size()) break;
        char e = bytes_[pos_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 'r': out += '\r'; break;
          case 't': out += '\t'; break;
          case 'b': out += '\b'; break;
          case 'f': out += '\f'; break;
          case '\r':
            if (pos_ < bytes_.size() && bytes_[pos_] == '\n') ++pos_;
            break;  // line continuation
          case '\n': break;
          default:
            if (e >= '0' && e <= '7') {
              int value = e - '0';
              for (int i = 0; i < 2 && pos_ < bytes_.size(); ++i) {
                char d = bytes_[pos_];
                if (d < '0' || d > '7') break;
                value = value * 8 + (d - '0');
                ++pos_;
              }
              out += static_cast<char>(value & 0xFF);
            } else {
              out += e;  // \( \) \\ and any unknown escape: the char itself
            }
        }
        continue;
      }
      if (c == '(') {
        ++depth;
        out += c;
        continue;
      }
      if (c == ')') {
        if (--depth == 0) {
          t.end = pos_;
          t.text = std::move(out);
          return t;
        }
        out += c;
        continue;
      }
      out += c;
    }
    throw Error(ErrorCode::MalformedString,
                "unterminated PostScript string starting at byte " + std::to_string(t.begin));
  }

  Token name_token() {
    Token t;
    t.kind = Token::Kind::Name;
    t.begin = pos_;
    ++pos_;  // consume '/'
    while (pos_ < bytes_.size() && is_regular(bytes_[pos_])) ++pos_;
    t.end = pos_;
    t.text = std::string(bytes_.substr(t.begin, t.end - t.begin));
    return t;
  }

  Token word_token() {
    Token t;
    t.begin = pos_;
    while (pos_ < bytes_.size() && is_regular(bytes_[pos_])) ++pos_;
    t.end = pos_;
    const std::string word(bytes_.substr(t.begin, t.end - t.begin));
    t.text = word;
    char* endp = nullptr;
    const double v = std::strtod(word.c_str(), &endp);
    const char c0 = word[0];
    const bool numeric_start = (c0 >= '0' && c0 <= '9') || c0 == '+' || c0 == '-' || c0 == '.';
    if (numeric_start && endp == word.c_str() + word.size() && std::isfinite(v)) {
      t.kind = Token::Kind::Number;
      t.number = v;
    } else {
      t.kind = Token::Kind::Word;
    }
    return t;
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

// Shallow operand model: only literals pushed since the last unknown
// operator are visible. Unknown operators clear the stack, anything they
// might have computed stays out of reach — by design.
struct Operand {
  enum class Kind { Num, Str, Name, Font, Array, Mark, Opaque };
  Kind kind = Kind::Opaque;
  double num = 0.0;
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::vector<double> array;
  double font_size = 0.0;
  bool font_size_known = false;
};

struct GState {
  Ctm ctm;
  bool ctm_valid = true;
  std::optional<Point> point;
  double font_size = 10.0;
};

struct PendingPrimitive {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string text;
  Point anchor;
  double slope_deg = 0.0;
  double font_size_pt = 10.0;
  Ctm ctm;
};

class BodyParser {
 public:
  BodyParser(std::string_view bytes, std::size_t start) : tok_(bytes, start) {}

  std::vector<PendingPrimitive> run() {
    while (auto t = tok_.next()) execute(*t);
    return std::move(prims_);
  }

 private:
  Operand pop() {
    if (ops_.empty()) return {};
    Operand o = std::move(ops_.back());
    ops_.pop_back();
    return o;
  }

  std::optional<double> pop_num() {
    Operand o = pop();
    if (o.kind == Operand::Kind::Num) return o.num;
    return std::nullopt;
  }

  void execute(const Token& t) {
    if (brace_depth_ > 0) {
      if (t.kind == Token::Kind::LBrace) ++brace_depth_;
      if (t.kind == Token::Kind::RBrace && --brace_depth_ == 0)
        ops_.push_back({});  // the procedure object
      return;
    }
    switch (t.kind) {
      case Token::Kind::Number: {
        Operand o;
        o.kind = Operand::Kind::Num;
        o.num = t.number;
        ops_.push_back(std::move(o));
        return;
      }
      case Token::Kind::String: {
        Operand o;
        o.kind = Operand::Kind::Str;
        o.text = t.text;
        o.begin = t.begin;
        o.end = t.end;
        ops_.push_back(std::move(o));
        return;
      }
      case Token::Kind::Name: {
        Operand o;
        o.kind = Operand::Kind::Name;
        o.text = t.text;
        ops_.push_back(std::move(o));
        return;
      }
      case Token::Kind::LBrace:
        ++brace_depth_;
        return;
      case Token::Kind::RBrace:
        ops_.push_back({});  // stray '}': treat result as opaque
        return;
      case Token::Kind::LBracket: {
        Operand o;
        o.kind = Operand::Kind::Mark;
        ops_.push_back(std::move(o));
        return;
      }
      case Token::Kind::RBracket:
        close_array();
        return;
      case Token::Kind::Other:
        ops_.clear();
        return;
      case Token::Kind::Word:
        word(t.text);
        return;
    }
  }

  void close_array() {
    std::vector<double> values;
    bool all_num = true;
    while (!ops_.empty()) {
      if (ops_.back().kind == Operand::Kind::Mark) {
        ops_.pop_back();
        Operand o;
        if (all_num) {
          std::reverse(values.begin(), values.end());
          o.kind = Operand::Kind::Array;
          o.array = std::move(values);
        }
        ops_.push_back(std::move(o));
        return;
      }
      if (ops_.back().kind != Operand::Kind::Num) all_num = false;
      values.push_back(ops_.back().num);
      ops_.pop_back();
    }
    ops_.push_back({});  // no mark found
  }

  void word(const std::string& w) {
    if (w == "moveto") {
      auto y = pop_num();
      auto x = pop_num();
      state_.point = (x && y) ? std::optional<Point>(Point{*x, *y}) : std::nullopt;
    } else if (w == "rmoveto") {
      auto y = pop_num();
      auto x = pop_num();
      if (x && y && state_.point)
        state_.point = Point{state_.point->x + *x, state_.point->y + *y};
      else
        state_.point = std::nullopt;
    } else if (w == "translate") {
      auto y = pop_num();
      auto x = pop_num();
      if (x && y && state_.ctm_valid) state_.ctm = compose(state_.ctm, Ctm::translation(*x, *y));
    } else if (w == "scale") {
      auto y = pop_num();
      auto x = pop_num();
      if (x && y && state_.ctm_valid) state_.ctm = compose(state_.ctm, Ctm::scaling(*x, *y));
    } else if (w == "rotate") {
      auto a = pop_num();
      if (a && state_.ctm_valid) state_.ctm = compose(state_.ctm, Ctm::rotation_deg(*a));
    } else if (w == "concat") {
      Operand m = pop();
      if (m.kind == Operand::Kind::Array && m.array.size() == 6 && state_.ctm_valid) {
        state_.ctm = compose(state_.ctm, Ctm{m.array[0], m.array[1], m.array[2], m.array[3],
                                             m.array[4], m.array[5]});
      }
    } else if (w == "gsave") {
      gstack_.push_back(state_);
    } else if (w == "grestore") {
      if (gstack_.empty())
        throw Error(ErrorCode::UnbalancedGsave, "grestore without matching gsave");
      state_ = gstack_.back();
      gstack_.pop_back();
    } else if (w == "findfont") {
      pop();
      Operand o;
      o.kind = Operand::Kind::Font;
      o.font_size = 1.0;
      o.font_size_known = true;
      ops_.push_back(std::move(o));
    } else if (w == "scalefont") {
      auto s = pop_num();
      Operand f = pop();
      Operand o;
      o.kind = Operand::Kind::Font;
      if (s && f.kind == Operand::Kind::Font && f.font_size_known) {
        o.font_size = f.font_size * *s;
        o.font_size_known = true;
      }
      ops_.push_back(std::move(o));
    } else if (w == "setfont") {
      Operand f = pop();
      if (f.kind == Operand::Kind::Font && f.font_size_known) state_.font_size = f.font_size;
    } else if (w == "show") {
      Operand s = pop();
      if (s.kind == Operand::Kind::Str && !s.text.empty() && state_.point && state_.ctm_valid) {
        PendingPrimitive p;
        p.begin = s.begin;
        p.end = s.end;
        p.text = s.text;
        p.anchor = ctm_apply(state_.ctm, *state_.point);
        p.slope_deg = x_axis_angle_deg(state_.ctm);
        p.font_size_pt = state_.font_size * std::sqrt(std::fabs(state_.ctm.determinant()));
        p.ctm = state_.ctm;
        prims_.push_back(std::move(p));
      }
    } else if (w == "setmatrix" || w == "initmatrix" || w == "initgraphics") {
      ops_.clear();
      state_.ctm_valid = false;
    } else if (w == "lineto" || w == "rlineto" || w == "curveto" || w == "rcurveto" ||
               w == "arc" || w == "arcn") {
      // path ops move the current point to places we do not model
      ops_.clear();
      state_.point = std::nullopt;
    } else {
      ops_.clear();
    }
  }

  Tokenizer tok_;
  std::vector<Operand> ops_;
  std::vector<GState> gstack_;
  GState state_;
  int brace_depth_ = 0;
  std::vector<PendingPrimitive> prims_;
};

// Splits leading comment lines (the DSC header) from the body. The header
// ends after %%EndComments or at the first line not starting with '%'.
std::size_t split_header(std::string_view bytes, std::vector<std::string>& lines) {
  std::size_t pos = 0;
  while (pos < bytes.size() && bytes[pos] == '%') {
    std::size_t eol = bytes.find('\n', pos);
    std::size_t end = eol == std::string_view::npos ? bytes.size() : eol + 1;
    lines.emplace_back(bytes.substr(pos, end - pos));
    const std::string& line = lines.back();
    pos = end;
    if (starts_with(line, "%%EndComments")) break;
  }
  return pos;
}

std::string_view line_content(std::string_view line) {
  std::size_t end = line.size();
  while (end > 0 && (line[end - 1] == '\n' || line[end - 1] == '\r')) --end;
  return line.substr(0, end);
}

std::optional<BBox> parse_bbox_line(std::string_view content, std::string_view prefix) {
  if (!starts_with(content, prefix)) return std::nullopt;
  std::string args(content.substr(prefix.size()));
  double v[4];
  char* p = args.data();
  for (int i = 0; i < 4; ++i) {
    char* endp = nullptr;
    v[i] = std::strtod(p, &endp);
    if (endp == p) return std::nullopt;
    p = endp;
  }
  return BBox{v[0], v[1], v[2], v[3]};
}

}  // namespace

void TextPrimitive::set_text(std::string new_text) {
  text = std::move(new_text);
  literal = "(" + escape_ps_text(text) + ")";
}

void EpsDocument::set_bounding_box(const BBox& box) {
  bounding_box = {std::floor(box.llx), std::floor(box.lly), std::ceil(box.urx),
                  std::ceil(box.ury)};
  hires_bounding_box = box;
  bbox_modified = true;
}

std::vector<TextPrimitive*> EpsDocument::text_primitives() {
  std::vector<TextPrimitive*> out;
  for (Element& e : elements)
    if (auto* t = std::get_if<TextPrimitive>(&e)) out.push_back(t);
  return out;
}

std::vector<const TextPrimitive*> EpsDocument::text_primitives() const {
  std::vector<const TextPrimitive*> out;
  for (const Element& e : elements)
    if (const auto* t = std::get_if<TextPrimitive>(&e)) out.push_back(t);
  return out;
}

EpsDocument parse_eps(std::string_view bytes) {
  if (!starts_with(bytes, "%!PS-Adobe"))
    throw Error(ErrorCode::BadSignature, "input does not start with %!PS-Adobe");

  EpsDocument doc;
  const std::size_t body_start = split_header(bytes, doc.header_comments);

  bool have_bbox = false;
  for (const std::string& raw : doc.header_comments) {
    const std::string_view content = line_content(raw);
    if (!have_bbox) {
      if (auto bb = parse_bbox_line(content, "%%BoundingBox:")) {
        doc.bounding_box = *bb;
        have_bbox = true;
        continue;
      }
    }
    if (!doc.hires_bounding_box) {
      if (auto bb = parse_bbox_line(content, "%%HiResBoundingBox:"))
        doc.hires_bounding_box = *bb;
    }
  }
  if (!have_bbox)
    throw Error(ErrorCode::MissingBoundingBox, "no parseable %%BoundingBox header comment");

  BodyParser parser(bytes, body_start);
  std::vector<PendingPrimitive> prims = parser.run();
  std::sort(prims.begin(), prims.end(),
            [](const PendingPrimitive& a, const PendingPrimitive& b) { return a.begin < b.begin; });

  std::size_t pos = body_start;
  for (PendingPrimitive& p : prims) {
    if (p.begin > pos) doc.elements.push_back(OpaqueChunk{std::string(bytes.substr(pos, p.begin - pos))});
    TextPrimitive prim;
    prim.text = std::move(p.text);
    prim.literal = std::string(bytes.substr(p.begin, p.end - p.begin));
    prim.anchor = p.anchor;
    prim.slope_deg = p.slope_deg;
    prim.font_size_pt = p.font_size_pt;
    prim.ctm = p.ctm;
    prim.source_span = {p.begin, p.end};
    doc.elements.push_back(std::move(prim));
    pos = p.end;
  }
  if (pos < bytes.size()) doc.elements.push_back(OpaqueChunk{std::string(bytes.substr(pos))});
  return doc;
}

namespace {

std::string render_header(const EpsDocument& doc) {
  if (!doc.bbox_modified) {
    std::string out;
    for (const std::string& line : doc.header_comments) out += line;
    return out;
  }

  const BBox& ibb = doc.bounding_box;
  std::string bbox_line = "%%BoundingBox: " + std::to_string(static_cast<long long>(ibb.llx)) +
                          " " + std::to_string(static_cast<long long>(ibb.lly)) + " " +
                          std::to_string(static_cast<long long>(ibb.urx)) + " " +
                          std::to_string(static_cast<long long>(ibb.ury));
  std::string hires_line;
  if (doc.hires_bounding_box) {
    const BBox& hbb = *doc.hires_bounding_box;
    hires_line = "%%HiResBoundingBox: " + format_ps_number(hbb.llx) + " " +
                 format_ps_number(hbb.lly) + " " + format_ps_number(hbb.urx) + " " +
                 format_ps_number(hbb.ury);
  }

  std::string out;
  bool wrote_bbox = false;
  bool wrote_hires = false;
  for (const std::string& raw : doc.header_comments) {
    const std::string_view content = line_content(raw);
    const std::string terminator(raw.substr(content.size()));
    if (!wrote_bbox && starts_with(content, "%%BoundingBox:")) {
      out += bbox_line + terminator;
      wrote_bbox = true;
      if (!hires_line.empty() && !wrote_hires) {
        bool file_has_hires = false;
        for (const std::string& other : doc.header_comments)
          if (starts_with(line_content(other), "%%HiResBoundingBox:")) file_has_hires = true;
        if (!file_has_hires) {
          out += hires_line + (terminator.empty() ? std::string("\n") : terminator);
          wrote_hires = true;
        }
      }
      continue;
    }
    if (!wrote_hires && starts_with(content, "%%HiResBoundingBox:") && !hires_line.empty()) {
      out += hires_line + terminator;
      wrote_hires = true;
      continue;
    }
    out += raw;
  }
  return out;
}

}  // namespace

std::string serialize_eps(const EpsDocument& doc) {
  std::string out = render_header(doc);
  for (const Element& e : doc.elements) {
    if (const auto* chunk = std::get_if<OpaqueChunk>(&e)) {
      out += chunk->bytes;
    } else {
      out += std::get<TextPrimitive>(e).literal;
    }
  }
  return out;
}

std::string escape_ps_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (unsigned char c : text) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '(': out += "\\("; break;
      case ')': out += "\\)"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      default:
        if (c < 0x20 || c >= 0x7F) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\%03o", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  return out;
}

}  // namespace psforge
