#pragma once

#include <memory>
#include <string>
#include <vector>

#include "psforge/errors.hpp"

namespace psforge {

// A small expression tree rendered to LaTeX. Only symbols with a direct
// LaTeX counterpart are covered; everything else falls back to \mathrm{}.

struct NumberFormat {
  int min_decimal_digits = 0;    // at most 17 is honored
  bool strip_trailing_point = true;  // false keeps one fractional digit on integers
};

enum class ExprKind {
  Number,
  Symbol,
  String,
  Power,
  Times,
  Plus,
  Divide,
  Sqrt,
  Call,
  Abs,
  Hold,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprKind kind = ExprKind::Number;
  double value = 0.0;          // Number
  NumberFormat format;         // Number
  std::string name;            // Symbol name, Call function name, String text
  int degree = 2;              // Sqrt
  std::vector<ExprPtr> children;

  static ExprPtr number(double v, NumberFormat fmt = {});
  static ExprPtr symbol(std::string name);
  static ExprPtr str(std::string text);
  static ExprPtr power(ExprPtr base, ExprPtr exponent);
  static ExprPtr times(std::vector<ExprPtr> factors);
  static ExprPtr plus(std::vector<ExprPtr> terms);
  static ExprPtr divide(ExprPtr numerator, ExprPtr denominator);
  static ExprPtr sqrt(ExprPtr radicand, int degree = 2);
  static ExprPtr call(std::string function, std::vector<ExprPtr> args);
  static ExprPtr abs(ExprPtr arg);
  static ExprPtr hold(ExprPtr inner);
};

bool expr_equal(const Expr& a, const Expr& b);
inline bool expr_equal(const ExprPtr& a, const ExprPtr& b) { return expr_equal(*a, *b); }

// Fixed-point decimal rendering: shortest round-trip digits, padded to at
// least min_decimal_digits; never emits a bare trailing point; -0 becomes 0.
// Throws Error{NonFinite} for NaN and infinities.
std::string format_number(double x, const NumberFormat& fmt = {});

// LaTeX for an expression: plain strings stay verbatim, everything else is
// wrapped in $...$. Functions outside {sin, cos, tan, log, ln, exp} render
// through \mathrm{}.
std::string guess_tex(const Expr& e);
inline std::string guess_tex(const ExprPtr& e) { return guess_tex(*e); }

// Sorts commutative Plus/Times children into a fixed order: numbers first
// (ascending), then symbols (lexicographic), then everything else by its
// rendered form. Hold nodes are barriers; their subtrees pass through
// untouched.
ExprPtr normal_order(const ExprPtr& e);

}  // namespace psforge
