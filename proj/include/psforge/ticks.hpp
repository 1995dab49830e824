#pragma once

#include <optional>
#include <vector>

#include "psforge/taggin.hpp"
#include "psforge/texgen.hpp"

namespace psforge {

struct Tick {
  double position = 0;
  ExprPtr label;  // null for minor ticks
  bool is_major = false;
};

// Linearly spaced ticks covering [from, to]. When major_step is absent a
// "nice" step (1, 2, 2.5 or 5 times a power of ten) is chosen: the largest
// candidate that places between 4 and 10 major ticks inside the range.
// Major positions are the multiples of the step inside [from, to]; each
// adjacent major pair is split by minors_per_major minor ticks, and partial
// cells at the ends get the minors that land inside the range. Labels are
// Number exprs with just enough decimal digits for the step. Throws
// Error{EmptyRange} when to <= from, Error{NonFinite} on non-finite input.
std::vector<Tick> lin_ticks(double from, double to,
                            std::optional<double> major_step = std::nullopt,
                            int minors_per_major = 0);

// Label rules for the major ticks: selectors match the tick label text as
// it would appear in the figure, options carry the rendered expression.
std::vector<LabelRule> psfrag_ticks(const std::vector<Tick>& ticks,
                                    const RuleOptions& defaults = {});

}  // namespace psforge
