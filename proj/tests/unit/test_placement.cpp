#include "psforge/placement.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "psforge/errors.hpp"
#include "psforge/eps_model.hpp"

using namespace psforge;

namespace {

const char* kCodes[12] = {"tl", "tc", "tr", "cl", "cc", "cr",
                          "bl", "bc", "br", "Bl", "Bc", "Br"};

PsfragRule rule_for(const char* texpos, const char* pspos, double scale = 1.0,
                    double rot = 0.0) {
  PsfragRule rule;
  rule.tag = "aA";
  rule.latex = "$x$";
  rule.texpos = AlignCode::parse(texpos);
  rule.pspos = AlignCode::parse(pspos);
  rule.scale = scale;
  rule.rot_deg = rot;
  return rule;
}

double dist(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

TEST_SUITE("placement") {

TEST_CASE("alignment codes parse with PSfrag defaults") {
  CHECK(AlignCode::parse("").str() == "Bl");
  CHECK(AlignCode::parse("c").str() == "cl");
  CHECK(AlignCode::parse("l").str() == "Bl");
  CHECK(AlignCode::parse("r").str() == "Br");
  CHECK(AlignCode::parse("t").str() == "tl");
  CHECK(AlignCode::parse("B").str() == "Bl");
  CHECK(AlignCode::parse("tc").str() == "tc");
  CHECK(AlignCode::parse("Br").str() == "Br");
  CHECK_THROWS_AS(AlignCode::parse("q"), Error);
  CHECK_THROWS_AS(AlignCode::parse("tx"), Error);
  CHECK_THROWS_AS(AlignCode::parse("lt"), Error);
  CHECK_THROWS_AS(AlignCode::parse("tcc"), Error);
}

TEST_CASE("reference points hit the documented anchors") {
  const TexBox box{10, 6, 2};
  CHECK(reference_point(box, AlignCode::parse("Bl")).x == 0.0);
  CHECK(reference_point(box, AlignCode::parse("Bl")).y == 0.0);
  CHECK(reference_point(box, AlignCode::parse("cc")).x == 5.0);
  CHECK(reference_point(box, AlignCode::parse("cc")).y == 2.0);
  CHECK(reference_point(box, AlignCode::parse("br")).x == 10.0);
  CHECK(reference_point(box, AlignCode::parse("br")).y == -2.0);
  CHECK(reference_point(box, AlignCode::parse("tl")).y == 6.0);
}

TEST_CASE("reference points scale with the box") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dim(0.0, 50.0);
  std::uniform_real_distribution<double> sf(0.1, 8.0);
  for (int i = 0; i < 500; ++i) {
    const TexBox box{dim(rng), dim(rng), dim(rng)};
    const double s = sf(rng);
    const TexBox scaled{box.width * s, box.height * s, box.depth * s};
    for (const char* code : kCodes) {
      const Point p = reference_point(box, AlignCode::parse(code));
      const Point q = reference_point(scaled, AlignCode::parse(code));
      CHECK(q.x == doctest::Approx(s * p.x).epsilon(1e-12));
      CHECK(q.y == doctest::Approx(s * p.y).epsilon(1e-12));
    }
  }
}

TEST_CASE("bottom-center overlay lands on the documented point") {
  const TexBox tex{4, 2, 0};
  const TexBox tag{10, 6, 0};
  const Placement p = place(tex, {100, 50}, tag, 0.0, rule_for("bc", "bc"));
  const Point bc = ctm_apply(p.transform, reference_point(tex, AlignCode::parse("bc")));
  CHECK(bc.x == doctest::Approx(105.0).epsilon(1e-12));
  CHECK(bc.y == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(p.placed_bbox.llx == doctest::Approx(103.0));
  CHECK(p.placed_bbox.lly == doctest::Approx(50.0));
  CHECK(p.placed_bbox.urx == doctest::Approx(107.0));
  CHECK(p.placed_bbox.ury == doctest::Approx(52.0));
}

TEST_CASE("baseline-left to baseline-left is a pure translation") {
  const Placement p = place({7, 3, 1}, {12, -4}, {20, 5, 2}, 0.0, rule_for("Bl", "Bl"));
  CHECK(p.transform.a == doctest::Approx(1.0));
  CHECK(p.transform.b == doctest::Approx(0.0));
  CHECK(p.transform.c == doctest::Approx(0.0));
  CHECK(p.transform.d == doctest::Approx(1.0));
  CHECK(p.transform.e == doctest::Approx(12.0));
  CHECK(p.transform.f == doctest::Approx(-4.0));
}

TEST_CASE("rotation is relative to the tag slope and scale shrinks lengths") {
  const TexBox tex{4, 2, 0};
  const Placement p = place(tex, {0, 0}, {10, 6, 0}, 30.0, rule_for("tc", "cc", 0.75, 45.0));
  CHECK(x_axis_angle_deg(p.transform) == doctest::Approx(75.0).epsilon(1e-9));
  const Point a = ctm_apply(p.transform, {0, 0});
  const Point b = ctm_apply(p.transform, {4, 2});
  CHECK(dist(a, b) == doctest::Approx(0.75 * std::hypot(4.0, 2.0)).epsilon(1e-12));
}

TEST_CASE("anchor coincidence across codes, slopes and scales") {
  std::mt19937 rng(20260813);
  std::uniform_real_distribution<double> dim(0.0, 40.0);
  std::uniform_real_distribution<double> coord(-300.0, 300.0);
  std::uniform_real_distribution<double> angle(-360.0, 360.0);
  std::uniform_real_distribution<double> sf(0.05, 4.0);
  for (int i = 0; i < 300; ++i) {
    const TexBox tex{dim(rng), dim(rng), dim(rng)};
    const TexBox tag{dim(rng), dim(rng), dim(rng)};
    const Point anchor{coord(rng), coord(rng)};
    const double slope = angle(rng);
    for (const char* texpos : kCodes) {
      for (const char* pspos : kCodes) {
        const PsfragRule rule = rule_for(texpos, pspos, sf(rng), angle(rng));
        const Placement p = place(tex, anchor, tag, slope, rule);
        const Point got = ctm_apply(p.transform, reference_point(tex, rule.texpos));
        const Point local = reference_point(tag, rule.pspos);
        const Point off = ctm_apply(Ctm::rotation_deg(slope), local);
        const Point want{anchor.x + off.x, anchor.y + off.y};
        REQUIRE(dist(got, want) < 1e-9);
      }
    }
  }
}

TEST_CASE("zero extra rotation preserves the slope") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> angle(0.0, 360.0);
  std::uniform_real_distribution<double> dim(0.1, 40.0);
  for (int i = 0; i < 1000; ++i) {
    const double slope = angle(rng);
    const Placement p = place({dim(rng), dim(rng), 0}, {0, 0}, {dim(rng), dim(rng), 0}, slope,
                              rule_for("cc", "cc", 1.0, 0.0));
    const double got = x_axis_angle_deg(p.transform);
    const double diff = std::fabs(std::remainder(got - slope, 360.0));
    REQUIRE(diff < 1e-9);
  }
}

TEST_CASE("shifts move the box in its local frame before rotation") {
  PsfragRule rule = rule_for("Bl", "Bl");
  rule.shift_x = "1in";
  rule.shift_y = "-36bp";
  const Placement p = place({4, 2, 0}, {10, 20}, {4, 2, 0}, 0.0, rule);
  const Point origin = ctm_apply(p.transform, {0, 0});
  CHECK(origin.x == doctest::Approx(10.0 + 72.0));
  CHECK(origin.y == doctest::Approx(20.0 - 36.0));

  rule.shift_x = "10bp";
  rule.shift_y = "0pt";
  rule.rot_deg = 90.0;
  const Placement q = place({4, 2, 0}, {10, 20}, {4, 2, 0}, 0.0, rule);
  const Point o = ctm_apply(q.transform, {0, 0});
  CHECK(o.x == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(o.y == doctest::Approx(30.0).epsilon(1e-12));
}

TEST_CASE("tex dimensions convert exactly") {
  CHECK(tex_dimension_to_bp("72.27pt") == doctest::Approx(72.0).epsilon(1e-12));
  CHECK(tex_dimension_to_bp("1in") == doctest::Approx(72.0));
  CHECK(tex_dimension_to_bp("25.4mm") == doctest::Approx(72.0));
  CHECK(tex_dimension_to_bp("2.54cm") == doctest::Approx(72.0));
  CHECK(tex_dimension_to_bp("10bp") == doctest::Approx(10.0));
  CHECK(tex_dimension_to_bp("-1.5mm") == doctest::Approx(-1.5 * 72.0 / 25.4));
  CHECK(tex_dimension_to_bp("0pt") == 0.0);
  CHECK(tex_dimension_to_bp(" 2 pt ") == doctest::Approx(2.0 * 72.0 / 72.27));
  CHECK_THROWS_AS(tex_dimension_to_bp("12"), Error);
  CHECK_THROWS_AS(tex_dimension_to_bp("3em"), Error);
  CHECK_THROWS_AS(tex_dimension_to_bp("abc"), Error);
  CHECK_THROWS_AS(tex_dimension_to_bp(""), Error);
}

TEST_CASE("union_bbox hulls protruding placements") {
  const BBox doc{0, 0, 100, 50};
  CHECK(union_bbox(doc, {}).urx == 100.0);
  Placement inside;
  inside.placed_bbox = {10, 10, 20, 20};
  Placement protruding;
  protruding.placed_bbox = {90, 10, 110, 20};
  CHECK(union_bbox(doc, {inside}).urx == 100.0);
  const BBox grown = union_bbox(doc, {inside, protruding});
  CHECK(grown.urx == 110.0);
  CHECK(grown.llx == 0.0);
  CHECK(grown.ury == 50.0);
  const BBox reversed = union_bbox(doc, {protruding, inside});
  CHECK(reversed.urx == grown.urx);
  const BBox twice = union_bbox(grown, {inside, protruding});
  CHECK(twice.urx == grown.urx);
}

TEST_CASE("bb override and trim rewrite the declared box") {
  EpsDocument doc = parse_eps(
      "%!PS-Adobe-3.0 EPSF-3.0\n%%BoundingBox: 0 0 100 50\n%%EndComments\n0 0 moveto\n(x) "
      "show\n");

  EpsDocument trimmed =
      apply_bb_override(doc, BBox{0, 0, 100, 50}, TrimSpec{0, 0, 0, -20});
  CHECK(trimmed.effective_bbox().ury == doctest::Approx(70.0));
  CHECK(trimmed.bbox_modified);

  EpsDocument replaced = apply_bb_override(doc, BBox{1, 2, 3, 4}, std::nullopt);
  CHECK(replaced.effective_bbox().llx == doctest::Approx(1.0));
  CHECK(replaced.effective_bbox().ury == doctest::Approx(4.0));

  EpsDocument untouched = apply_bb_override(doc, std::nullopt, TrimSpec{0, 0, 0, 0});
  CHECK(!untouched.bbox_modified);
  CHECK(serialize_eps(untouched) == serialize_eps(doc));

  CHECK_THROWS_AS(apply_bb_override(doc, std::nullopt, TrimSpec{60, 0, 60, 0}), Error);
}

TEST_CASE("estimated label boxes follow the documented ratios") {
  const TexBox box = estimated_label_box("abc", 10.0);
  CHECK(box.width == doctest::Approx(18.0));
  CHECK(box.height == doctest::Approx(7.0));
  CHECK(box.depth == doctest::Approx(2.0));
}

}  // TEST_SUITE
