#pragma once

#include <algorithm>
#include <cmath>

#include "psforge/errors.hpp"

namespace psforge {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline bool operator==(const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }

// 2x3 affine matrix in PostScript order [a b c d e f]:
// maps (x, y) -> (a*x + c*y + e, b*x + d*y + f).
struct Ctm {
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;
  double d = 1.0;
  double e = 0.0;
  double f = 0.0;

  static Ctm identity() { return {}; }

  static Ctm translation(double tx, double ty) { return {1.0, 0.0, 0.0, 1.0, tx, ty}; }

  static Ctm scaling(double sx, double sy) { return {sx, 0.0, 0.0, sy, 0.0, 0.0}; }

  static Ctm rotation_deg(double deg) {
    const double rad = deg * (M_PI / 180.0);
    const double s = std::sin(rad);
    const double c = std::cos(rad);
    return {c, s, -s, c, 0.0, 0.0};
  }

  double determinant() const { return a * d - b * c; }
};

inline bool operator==(const Ctm& m, const Ctm& n) {
  return m.a == n.a && m.b == n.b && m.c == n.c && m.d == n.d && m.e == n.e && m.f == n.f;
}

inline Point ctm_apply(const Ctm& m, Point p) {
  return {m.a * p.x + m.c * p.y + m.e, m.b * p.x + m.d * p.y + m.f};
}

// compose(m1, m2) applies m2 first: ctm_apply(compose(m1, m2), p) ==
// ctm_apply(m1, ctm_apply(m2, p)).
inline Ctm compose(const Ctm& m1, const Ctm& m2) {
  return {
      m1.a * m2.a + m1.c * m2.b,        m1.b * m2.a + m1.d * m2.b,
      m1.a * m2.c + m1.c * m2.d,        m1.b * m2.c + m1.d * m2.d,
      m1.a * m2.e + m1.c * m2.f + m1.e, m1.b * m2.e + m1.d * m2.f + m1.f,
  };
}

// Angle of the transformed x axis, in [0, 360) degrees.
inline double x_axis_angle_deg(const Ctm& m) {
  double deg = std::atan2(m.b, m.a) * (180.0 / M_PI);
  deg = std::fmod(deg, 360.0);
  if (deg < 0.0) deg += 360.0;
  return deg;
}

struct BBox {
  double llx = 0.0;
  double lly = 0.0;
  double urx = 0.0;
  double ury = 0.0;

  double width() const { return urx - llx; }
  double height() const { return ury - lly; }
  bool valid() const { return llx <= urx && lly <= ury; }
};

inline bool operator==(const BBox& a, const BBox& b) {
  return a.llx == b.llx && a.lly == b.lly && a.urx == b.urx && a.ury == b.ury;
}

inline BBox bbox_union(const BBox& a, const BBox& b) {
  return {std::min(a.llx, b.llx), std::min(a.lly, b.lly),
          std::max(a.urx, b.urx), std::max(a.ury, b.ury)};
}

inline bool bbox_contains(const BBox& outer, const BBox& inner) {
  return outer.llx <= inner.llx && outer.lly <= inner.lly &&
         outer.urx >= inner.urx && outer.ury >= inner.ury;
}

}  // namespace psforge
