#include "psforge/placement.hpp"

#include <cmath>
#include <cstdlib>

#include "psforge/errors.hpp"

namespace psforge {

AlignCode AlignCode::parse(std::string_view code) {
  auto bad = [&] {
    return Error(ErrorCode::BadAlignCode, "illegal alignment code \"" + std::string(code) + "\"");
  };
  AlignCode out;
  if (code.empty()) return out;
  if (code.size() > 2) throw bad();

  auto vertical_of = [](char c) -> std::optional<VAlign> {
    switch (c) {
      case 't': return VAlign::Top;
      case 'c': return VAlign::Center;
      case 'b': return VAlign::Bottom;
      case 'B': return VAlign::Baseline;
      default: return std::nullopt;
    }
  };
  auto horizontal_of = [](char c) -> std::optional<HAlign> {
    switch (c) {
      case 'l': return HAlign::Left;
      case 'c': return HAlign::Center;
      case 'r': return HAlign::Right;
      default: return std::nullopt;
    }
  };

  if (code.size() == 1) {
    // A lone 'c' is read as the vertical axis, matching \psfrag's
    // one-letter usage; 'l'/'r' can only be horizontal.
    if (auto v = vertical_of(code[0])) {
      out.vertical = *v;
      return out;
    }
    if (auto h = horizontal_of(code[0])) {
      out.horizontal = *h;
      return out;
    }
    throw bad();
  }

  auto v = vertical_of(code[0]);
  auto h = horizontal_of(code[1]);
  if (!v || !h) throw bad();
  out.vertical = *v;
  out.horizontal = *h;
  return out;
}

std::string AlignCode::str() const {
  return std::string{static_cast<char>(vertical), static_cast<char>(horizontal)};
}

Point reference_point(const TexBox& box, AlignCode code) {
  double x = 0.0;
  switch (code.horizontal) {
    case HAlign::Left: x = 0.0; break;
    case HAlign::Center: x = box.width / 2.0; break;
    case HAlign::Right: x = box.width; break;
  }
  double y = 0.0;
  switch (code.vertical) {
    case VAlign::Top: y = box.height; break;
    case VAlign::Center: y = (box.height - box.depth) / 2.0; break;
    case VAlign::Bottom: y = -box.depth; break;
    case VAlign::Baseline: y = 0.0; break;
  }
  return {x, y};
}

Placement place(const TexBox& tex_box, Point ps_anchor, const TexBox& ps_box,
                double ps_slope_deg, const PsfragRule& rule) {
  const double dx = tex_dimension_to_bp(rule.shift_x);
  const double dy = tex_dimension_to_bp(rule.shift_y);
  const Point tex_ref = reference_point(tex_box, rule.texpos);
  const Point ps_ref_local = reference_point(ps_box, rule.pspos);
  const Point ps_ref_dev_offset = ctm_apply(Ctm::rotation_deg(ps_slope_deg), ps_ref_local);
  const Point ps_ref_dev = {ps_anchor.x + ps_ref_dev_offset.x, ps_anchor.y + ps_ref_dev_offset.y};

  Ctm m = Ctm::translation(ps_ref_dev.x, ps_ref_dev.y);
  m = compose(m, Ctm::rotation_deg(ps_slope_deg + rule.rot_deg));
  m = compose(m, Ctm::scaling(rule.scale, rule.scale));
  m = compose(m, Ctm::translation(dx - tex_ref.x, dy - tex_ref.y));

  const Point corners[4] = {
      ctm_apply(m, {0.0, -tex_box.depth}),
      ctm_apply(m, {tex_box.width, -tex_box.depth}),
      ctm_apply(m, {tex_box.width, tex_box.height}),
      ctm_apply(m, {0.0, tex_box.height}),
  };
  BBox box{corners[0].x, corners[0].y, corners[0].x, corners[0].y};
  for (int i = 1; i < 4; ++i) {
    box.llx = std::min(box.llx, corners[i].x);
    box.lly = std::min(box.lly, corners[i].y);
    box.urx = std::max(box.urx, corners[i].x);
    box.ury = std::max(box.ury, corners[i].y);
  }
  return {m, box};
}

BBox union_bbox(const BBox& doc_bbox, const std::vector<Placement>& placements) {
  BBox out = doc_bbox;
  for (const Placement& p : placements) out = bbox_union(out, p.placed_bbox);
  return out;
}

EpsDocument apply_bb_override(EpsDocument doc, std::optional<BBox> bb,
                              std::optional<TrimSpec> trim) {
  const bool trims = trim && (trim->left != 0.0 || trim->bottom != 0.0 || trim->right != 0.0 ||
                              trim->top != 0.0);
  if (!bb && !trims) return doc;

  BBox box = bb.value_or(doc.effective_bbox());
  if (trim) {
    box.llx += trim->left;
    box.lly += trim->bottom;
    box.urx -= trim->right;
    box.ury -= trim->top;
  }
  if (!box.valid())
    throw Error(ErrorCode::DegenerateBox, "bounding-box override inverted the box");
  doc.set_bounding_box(box);
  return doc;
}

double tex_dimension_to_bp(std::string_view dim) {
  std::size_t b = 0;
  std::size_t e = dim.size();
  while (b < e && (dim[b] == ' ' || dim[b] == '\t')) ++b;
  while (e > b && (dim[e - 1] == ' ' || dim[e - 1] == '\t')) --e;
  const std::string s(dim.substr(b, e - b));

  char* endp = nullptr;
  const double value = std::strtod(s.c_str(), &endp);
  if (endp == s.c_str() || !std::isfinite(value))
    throw Error(ErrorCode::BadDimension, "cannot parse TeX dimension \"" + std::string(dim) + "\"");
  std::string unit(endp);
  while (!unit.empty() && unit.front() == ' ') unit.erase(unit.begin());

  double factor = 0.0;
  if (unit == "pt")
    factor = 72.0 / 72.27;
  else if (unit == "bp")
    factor = 1.0;
  else if (unit == "in")
    factor = 72.0;
  else if (unit == "mm")
    factor = 72.0 / 25.4;
  else if (unit == "cm")
    factor = 72.0 / 2.54;
  else
    throw Error(ErrorCode::BadDimension,
                "unsupported unit in TeX dimension \"" + std::string(dim) + "\"");
  return value * factor;
}

TexBox estimated_label_box(std::string_view text, double font_size_pt) {
  return {0.6 * font_size_pt * static_cast<double>(text.size()), 0.7 * font_size_pt,
          0.2 * font_size_pt};
}

}  // namespace psforge
