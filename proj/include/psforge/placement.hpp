#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "psforge/eps_model.hpp"
#include "psforge/geometry.hpp"

namespace psforge {

// PSfrag positioning geometry: reference points on boxes with baselines,
// overlay of the LaTeX box onto the PostScript tag box, rotation relative
// to the tag slope, scaling, shifts, and the resulting bounding boxes.

enum class VAlign : char { Top = 't', Center = 'c', Bottom = 'b', Baseline = 'B' };
enum class HAlign : char { Left = 'l', Center = 'c', Right = 'r' };

struct AlignCode {
  VAlign vertical = VAlign::Baseline;
  HAlign horizontal = HAlign::Left;

  // Parses a 0-2 character code; first character vertical {t,c,b,B}, second
  // horizontal {l,c,r}. A lone l/r sets the horizontal axis; a lone c the
  // vertical one. Missing axes default to B and l. Throws Error{BadAlignCode}.
  static AlignCode parse(std::string_view code);

  std::string str() const;  // canonical two-character form
};

inline bool operator==(AlignCode a, AlignCode b) {
  return a.vertical == b.vertical && a.horizontal == b.horizontal;
}

// A typeset box in baseline-left coordinates: width right of the origin,
// height above the baseline, depth below it.
struct TexBox {
  double width = 0.0;
  double height = 0.0;
  double depth = 0.0;
};

struct PsfragRule {
  std::string tag;
  std::string latex;
  AlignCode texpos;         // alignment inside the LaTeX replacement
  AlignCode pspos;          // alignment inside the PostScript tag box
  double scale = 1.0;
  double rot_deg = 0.0;     // relative to the tag slope
  std::string shift_x = "0pt";  // TeX dimensions, applied in box-local space
  std::string shift_y = "0pt";
};

struct Placement {
  Ctm transform;    // LaTeX-box-local (baseline-left origin) -> device space
  BBox placed_bbox;
};

// Reference point selected by an alignment code, in baseline-left
// coordinates: x in {0, width/2, width}, y in {height, (height-depth)/2,
// -depth, 0}.
Point reference_point(const TexBox& box, AlignCode code);

// Overlays the LaTeX box on the tag box so the two reference points
// coincide; rotation is relative to the tag slope, so rot_deg = 0 preserves
// the PostScript orientation. ps_anchor is the tag box baseline-left in
// device space.
Placement place(const TexBox& tex_box, Point ps_anchor, const TexBox& ps_box,
                double ps_slope_deg, const PsfragRule& rule);

// Smallest box containing doc_bbox and every placed box.
BBox union_bbox(const BBox& doc_bbox, const std::vector<Placement>& placements);

struct TrimSpec {
  double left = 0.0;
  double bottom = 0.0;
  double right = 0.0;
  double top = 0.0;
};

// Replaces the DSC bounding box with bb (when given), then shrinks it by
// trim per side; negative trim values grow the box. Throws
// Error{DegenerateBox} when the result is inverted.
EpsDocument apply_bb_override(EpsDocument doc, std::optional<BBox> bb,
                              std::optional<TrimSpec> trim);

// TeX dimension string ("2pt", "-1.5mm", ...) converted to PostScript
// points. Accepted units and exact factors, in bp: pt = 72/72.27, bp = 1,
// in = 72, mm = 72/25.4, cm = 72/2.54. Throws Error{BadDimension}.
double tex_dimension_to_bp(std::string_view dim);

// Box estimate for a PostScript label when no font metrics are available:
// 0.6*size per character wide, 0.7*size above and 0.2*size below the
// baseline. Only affects anchoring of non-baseline-left codes.
TexBox estimated_label_box(std::string_view text, double font_size_pt);

}  // namespace psforge
