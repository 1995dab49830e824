#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "psforge/geometry.hpp"

namespace psforge {

// Parser for a constrained EPS dialect: DSC header comments followed by a
// body in which text is produced through moveto/rmoveto, translate/scale/
// rotate/concat, gsave/grestore, findfont/scalefont/setfont and show with
// literal operands. Everything else round-trips verbatim as opaque bytes.
//
// Model simplifications, part of the dialect contract:
//  - the current point is tracked in user space and mapped through the CTM
//    when `show` executes;
//  - `show` does not advance the current point, so chained shows share an
//    anchor;
//  - operators fed by non-literal operands leave the transform untouched.

struct ByteRange {
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct OpaqueChunk {
  std::string bytes;
};

struct TextPrimitive {
  std::string text;     // decoded PostScript string content
  std::string literal;  // string literal as serialized, including parentheses
  Point anchor;         // device-space position of the show origin
  double slope_deg = 0.0;
  double font_size_pt = 10.0;  // nominal setfont size scaled by sqrt(|det ctm|)
  Ctm ctm;
  ByteRange source_span;  // span of the literal in the original input

  // Replaces the label text; the literal is re-escaped canonically.
  void set_text(std::string new_text);
};

using Element = std::variant<OpaqueChunk, TextPrimitive>;

struct EpsDocument {
  std::vector<std::string> header_comments;  // raw lines, terminators included
  BBox bounding_box;
  std::optional<BBox> hires_bounding_box;
  bool bbox_modified = false;  // regenerate DSC bounding-box lines on output
  std::vector<Element> elements;

  BBox effective_bbox() const { return hires_bounding_box.value_or(bounding_box); }

  void set_bounding_box(const BBox& box);

  std::vector<TextPrimitive*> text_primitives();
  std::vector<const TextPrimitive*> text_primitives() const;
};

EpsDocument parse_eps(std::string_view bytes);

std::string serialize_eps(const EpsDocument& doc);

// Canonical escaping for PostScript string bodies: \ ( ) and the usual
// control shorthands, other non-printable bytes as 3-digit octal.
std::string escape_ps_text(std::string_view text);

}  // namespace psforge
