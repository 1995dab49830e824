#include "psforge/texgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace psforge {

ExprPtr Expr::number(double v, NumberFormat fmt) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Number;
  e->value = v;
  e->format = fmt;
  return e;
}

ExprPtr Expr::symbol(std::string name) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Symbol;
  e->name = std::move(name);
  return e;
}

ExprPtr Expr::str(std::string text) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::String;
  e->name = std::move(text);
  return e;
}

ExprPtr Expr::power(ExprPtr base, ExprPtr exponent) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Power;
  e->children = {std::move(base), std::move(exponent)};
  return e;
}

ExprPtr Expr::times(std::vector<ExprPtr> factors) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Times;
  e->children = std::move(factors);
  return e;
}

ExprPtr Expr::plus(std::vector<ExprPtr> terms) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Plus;
  e->children = std::move(terms);
  return e;
}

ExprPtr Expr::divide(ExprPtr numerator, ExprPtr denominator) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Divide;
  e->children = {std::move(numerator), std::move(denominator)};
  return e;
}

ExprPtr Expr::sqrt(ExprPtr radicand, int degree) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Sqrt;
  e->degree = degree;
  e->children = {std::move(radicand)};
  return e;
}

ExprPtr Expr::call(std::string function, std::vector<ExprPtr> args) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Call;
  e->name = std::move(function);
  e->children = std::move(args);
  return e;
}

ExprPtr Expr::abs(ExprPtr arg) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Abs;
  e->children = {std::move(arg)};
  return e;
}

ExprPtr Expr::hold(ExprPtr inner) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Hold;
  e->children = {std::move(inner)};
  return e;
}

bool expr_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprKind::Number:
      if (a.value != b.value) return false;
      if (a.format.min_decimal_digits != b.format.min_decimal_digits) return false;
      if (a.format.strip_trailing_point != b.format.strip_trailing_point) return false;
      break;
    case ExprKind::Symbol:
    case ExprKind::String:
    case ExprKind::Call:
      if (a.name != b.name) return false;
      break;
    case ExprKind::Sqrt:
      if (a.degree != b.degree) return false;
      break;
    default:
      break;
  }
  if (a.children.size() != b.children.size()) return false;
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!expr_equal(*a.children[i], *b.children[i])) return false;
  return true;
}

std::string format_number(double x, const NumberFormat& fmt) {
  if (!std::isfinite(x)) throw Error(ErrorCode::NonFinite, "cannot format non-finite number");
  if (x == 0.0) x = 0.0;  // normalize -0

  char buf[1100];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed);
  std::string out(buf, ptr);

  const int min_digits = std::clamp(fmt.min_decimal_digits, 0, 17);
  const int effective_min = std::max(min_digits, fmt.strip_trailing_point ? 0 : 1);
  const std::size_t point = out.find('.');
  if (point == std::string::npos) {
    if (effective_min > 0) {
      out += '.';
      out.append(static_cast<std::size_t>(effective_min), '0');
    }
  } else {
    const int have = static_cast<int>(out.size() - point - 1);
    if (have < effective_min) out.append(static_cast<std::size_t>(effective_min - have), '0');
  }
  return out;
}

namespace {

constexpr int kPrecPlus = 1;
constexpr int kPrecTimes = 2;
constexpr int kPrecAtom = 4;

bool is_known_function(const std::string& name) {
  static const char* const kKnown[] = {"sin", "cos", "tan", "log", "ln", "exp"};
  return std::find_if(std::begin(kKnown), std::end(kKnown),
                      [&](const char* k) { return name == k; }) != std::end(kKnown);
}

int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Plus: return kPrecPlus;
    case ExprKind::Times: return kPrecTimes;
    case ExprKind::Power: return 3;
    case ExprKind::Hold: return e.children.empty() ? kPrecAtom : precedence(*e.children[0]);
    default: return kPrecAtom;
  }
}

std::string render(const Expr& e, int min_prec);

std::string render_factors(const std::vector<ExprPtr>& factors, std::size_t first) {
  std::string out;
  for (std::size_t i = first; i < factors.size(); ++i) {
    std::string f = render(*factors[i], kPrecTimes);
    if (i > first && !f.empty() && f[0] == '-') f = "(" + f + ")";
    if (i > first) {
      const char c = f.empty() ? '\0' : f[0];
      out += (c >= '0' && c <= '9') || c == '.' ? "\\cdot " : " ";
    }
    out += f;
  }
  return out;
}

std::string render_node(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Number:
      return format_number(e.value, e.format);
    case ExprKind::Symbol:
      return e.name;
    case ExprKind::String:
      return "\\mathrm{" + e.name + "}";
    case ExprKind::Power: {
      std::string base = render(*e.children[0], kPrecAtom);
      if (!base.empty() && base[0] == '-') base = "(" + base + ")";
      const std::string exponent = render(*e.children[1], 0);
      if (exponent.size() == 1) return base + "^" + exponent;
      return base + "^{" + exponent + "}";
    }
    case ExprKind::Times: {
      if (e.children.empty()) return "1";
      if (e.children.size() == 1) return render(*e.children[0], kPrecTimes);
      const Expr& head = *e.children[0];
      if (head.kind == ExprKind::Number && head.value == -1.0)
        return "-" + render_factors(e.children, 1);
      return render_factors(e.children, 0);
    }
    case ExprKind::Plus: {
      if (e.children.empty()) return "0";
      std::string out;
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        const std::string term = render(*e.children[i], kPrecPlus);
        if (i > 0 && (term.empty() || term[0] != '-')) out += "+";
        out += term;
      }
      return out;
    }
    case ExprKind::Divide:
      return "\\frac{" + render(*e.children[0], 0) + "}{" + render(*e.children[1], 0) + "}";
    case ExprKind::Sqrt:
      if (e.degree == 2) return "\\sqrt{" + render(*e.children[0], 0) + "}";
      return "\\sqrt[" + std::to_string(e.degree) + "]{" + render(*e.children[0], 0) + "}";
    case ExprKind::Call: {
      std::string args;
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i > 0) args += ", ";
        args += render(*e.children[i], 0);
      }
      if (is_known_function(e.name)) return "\\" + e.name + " (" + args + ")";
      return "\\mathrm{" + e.name + "}(" + args + ")";
    }
    case ExprKind::Abs:
      return "\\left|" + render(*e.children[0], 0) + "\\right|";
    case ExprKind::Hold:
      return e.children.empty() ? std::string() : render_node(*e.children[0]);
  }
  return {};
}

std::string render(const Expr& e, int min_prec) {
  if (e.kind == ExprKind::Hold && !e.children.empty()) return render(*e.children[0], min_prec);
  std::string body = render_node(e);
  if (precedence(e) < min_prec) return "(" + body + ")";
  return body;
}

const Expr& unwrap_hold(const Expr& e) {
  const Expr* p = &e;
  while (p->kind == ExprKind::Hold && !p->children.empty()) p = p->children[0].get();
  return *p;
}

}  // namespace

std::string guess_tex(const Expr& e) {
  const Expr& inner = unwrap_hold(e);
  if (inner.kind == ExprKind::String) return inner.name;
  return "$" + render(e, 0) + "$";
}

ExprPtr normal_order(const ExprPtr& e) {
  if (e->kind == ExprKind::Hold) return e;
  auto copy = std::make_shared<Expr>(*e);
  for (ExprPtr& child : copy->children) child = normal_order(child);
  if (copy->kind == ExprKind::Plus || copy->kind == ExprKind::Times) {
    auto rank = [](const Expr& x) {
      if (x.kind == ExprKind::Number) return 0;
      if (x.kind == ExprKind::Symbol) return 1;
      return 2;
    };
    std::stable_sort(copy->children.begin(), copy->children.end(),
                     [&](const ExprPtr& a, const ExprPtr& b) {
                       const int ra = rank(*a);
                       const int rb = rank(*b);
                       if (ra != rb) return ra < rb;
                       if (ra == 0) return a->value < b->value;
                       if (ra == 1) return a->name < b->name;
                       return guess_tex(*a) < guess_tex(*b);
                     });
  }
  return copy;
}

}  // namespace psforge
