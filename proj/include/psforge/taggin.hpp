#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "psforge/eps_model.hpp"
#include "psforge/placement.hpp"

namespace psforge {

// Tag allocation and label substitution: rewrite a document's text
// primitives to short replacement-safe tags and keep the book-keeping that
// binds each tag to its PSfrag rule.

struct Tag {
  std::string value;
};

inline bool operator==(const Tag& a, const Tag& b) { return a.value == b.value; }

// Tags must be non-empty and purely alphanumeric. Allocated tags use
// letters only so they can never collide with numeric tick labels.
bool is_valid_tag(std::string_view value);

// Deterministic, injective allocation: aA, aB, ..., aZ, bA, ..., zZ, then
// three letters (aAA, aAB, ...) past 676.
Tag allocate_tag(std::size_t index);

// The per-label option set; unset members fall back to the documented
// defaults (texpos Bl, pspos copies texpos, scale 1, rotation 0, no shift).
struct RuleOptions {
  std::optional<std::string> tex_command;  // manual LaTeX override
  std::optional<std::string> tag;          // explicit tag request
  std::optional<AlignCode> texpos;
  std::optional<AlignCode> pspos;
  double scale = 1.0;
  double rot_deg = 0.0;
  std::string shift_x = "0pt";
  std::string shift_y = "0pt";
};

bool rule_options_equal(const RuleOptions& a, const RuleOptions& b);

// Rules-file / tick-rule form: selects labels by exact text or by ordinal
// among the document's text primitives.
struct LabelSelector {
  std::optional<std::string> text;
  std::optional<std::size_t> ordinal;
};

struct LabelRule {
  LabelSelector match;
  RuleOptions options;
};

// A fully targeted rule: the replacement LaTeX has been resolved and the
// label is identified by primitive index.
struct RulePrecursor {
  std::size_t primitive_index = 0;
  std::string latex;
  RuleOptions options;
};

struct TagMapEntry {
  Tag tag;
  TextPrimitive original;  // first substituted primitive of the group
  std::vector<std::size_t> primitive_indices;
  PsfragRule rule;
};

struct TagMap {
  std::vector<TagMapEntry> entries;
};

struct SubstitutionResult {
  EpsDocument doc;
  TagMap map;
};

// Replaces each targeted primitive's text by a tag, in document order.
// Primitives with identical text and identical rules share one tag; a tag
// never equals any surviving label text nor any string token left in
// opaque content (colliding candidates are skipped). Re-running on the
// tagged output with the same precursors is a no-op. Throws
// Error{TagCollision} when explicit tags collide.
SubstitutionResult substitute_labels(const EpsDocument& doc,
                                     const std::vector<RulePrecursor>& precursors);

}  // namespace psforge
