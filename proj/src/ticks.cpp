#include "psforge/ticks.hpp"

#include <algorithm>
#include <cmath>

#include "psforge/errors.hpp"

namespace psforge {

namespace {

double pow10i(int k) { return std::pow(10.0, k); }

// A step decomposed as mantissa * 10^-decimals with integer mantissa, so
// tick values can be built from exact integer arithmetic.
struct DecimalStep {
  long long mantissa = 1;
  int decimals = 0;
  double value() const { return static_cast<double>(mantissa) / pow10i(decimals); }
};

long long majors_in_range(double from, double to, double step) {
  const double tol = (to - from) * 1e-9;
  const long long lo = static_cast<long long>(std::ceil(from / step - tol / step));
  const long long hi = static_cast<long long>(std::floor(to / step + tol / step));
  return hi >= lo ? hi - lo + 1 : 0;
}

DecimalStep choose_step(double from, double to) {
  const double span = to - from;
  const int k_hi = static_cast<int>(std::ceil(std::log10(span))) + 1;
  DecimalStep fallback;
  bool have_fallback = false;
  for (int k = k_hi; k >= k_hi - 12; --k) {
    // Candidates in descending order within one decade: 5, 2.5, 2, 1 x 10^k.
    const DecimalStep candidates[4] = {
        {5, -k},
        {25, 1 - k},
        {2, -k},
        {1, -k},
    };
    for (DecimalStep c : candidates) {
      if (c.decimals < 0) {
        // Fold the power of ten into the mantissa so decimals stays >= 0.
        bool overflow = false;
        for (int i = c.decimals; i < 0; ++i) {
          if (c.mantissa > 900000000000000000LL / 10) {
            overflow = true;
            break;
          }
          c.mantissa *= 10;
        }
        if (overflow) continue;
        c.decimals = 0;
      }
      const long long n = majors_in_range(from, to, c.value());
      if (n >= 4 && n <= 10) return c;
      if (n >= 4) {
        fallback = c;  // smallest step seen that yields at least 4
        have_fallback = true;
      }
    }
  }
  if (have_fallback) return fallback;
  DecimalStep last{1, 12};
  return last;
}

// Decompose a user-provided step if it is an exact short decimal;
// otherwise fall back to plain floating-point positions.
std::optional<DecimalStep> decompose(double step) {
  for (int d = 0; d <= 9; ++d) {
    const double scaled = step * pow10i(d);
    const double rounded = std::round(scaled);
    if (rounded >= 1.0 && rounded < 1e15 &&
        std::fabs(scaled - rounded) <= 1e-9 * std::max(1.0, std::fabs(scaled))) {
      return DecimalStep{static_cast<long long>(rounded), d};
    }
  }
  return std::nullopt;
}

bool is_integral(double x) { return x == std::floor(x); }

}  // namespace

std::vector<Tick> lin_ticks(double from, double to, std::optional<double> major_step,
                            int minors_per_major) {
  if (!std::isfinite(from) || !std::isfinite(to))
    throw Error(ErrorCode::NonFinite, "tick range must be finite");
  if (!(from < to))
    throw Error(ErrorCode::EmptyRange, "tick range requires from < to");
  if (major_step && (!std::isfinite(*major_step) || *major_step <= 0.0))
    throw Error(ErrorCode::EmptyRange, "major step must be positive and finite");
  if (minors_per_major < 0) minors_per_major = 0;

  std::optional<DecimalStep> dec =
      major_step ? decompose(*major_step) : std::optional<DecimalStep>(choose_step(from, to));
  const double step = major_step ? *major_step : dec->value();

  const double tol = (to - from) * 1e-9;
  const long long i_lo = static_cast<long long>(std::ceil((from - tol) / step));
  const long long i_hi = static_cast<long long>(std::floor((to + tol) / step));

  int digits = dec ? dec->decimals : 6;
  if (dec) {
    // Trailing zeros in the mantissa do not need printed decimals: a step
    // of 0.50 carries one significant decimal, not two.
    long long m = dec->mantissa;
    while (digits > 0 && m % 10 == 0) {
      m /= 10;
      --digits;
    }
  }
  int label_digits = digits;
  if (step < 1.0 || !is_integral(from) || !is_integral(to)) label_digits = std::max(digits, 1);
  const NumberFormat fmt{label_digits, true};

  auto position_of = [&](long long i) {
    if (dec) return static_cast<double>(i) * static_cast<double>(dec->mantissa) /
                    pow10i(dec->decimals);
    return static_cast<double>(i) * step;
  };

  std::vector<Tick> out;
  const int cells = minors_per_major + 1;
  auto push_minors = [&](long long i) {
    const double base = position_of(i);
    for (int j = 1; j <= minors_per_major; ++j) {
      const double p = base + step * j / cells;
      if (p >= from - tol && p <= to + tol) out.push_back({p, nullptr, false});
    }
  };

  push_minors(i_lo - 1);
  for (long long i = i_lo; i <= i_hi; ++i) {
    const double p = position_of(i);
    out.push_back({p, Expr::number(p, fmt), true});
    push_minors(i);
  }
  return out;
}

std::vector<LabelRule> psfrag_ticks(const std::vector<Tick>& ticks, const RuleOptions& defaults) {
  std::vector<LabelRule> out;
  for (const Tick& tick : ticks) {
    if (!tick.label) continue;
    LabelRule rule;
    rule.match.text = format_number(tick.label->value, tick.label->format);
    rule.options = defaults;
    rule.options.tex_command = guess_tex(tick.label);
    out.push_back(std::move(rule));
  }
  return out;
}

}  // namespace psforge
