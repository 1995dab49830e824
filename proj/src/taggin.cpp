#include "psforge/taggin.hpp"

#include <algorithm>
#include <set>

#include "psforge/errors.hpp"

namespace psforge {

bool is_valid_tag(std::string_view value) {
  if (value.empty()) return false;
  for (char c : value) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
    if (!ok) return false;
  }
  return true;
}

Tag allocate_tag(std::size_t index) {
  // Levels by minor-letter count: level 1 holds 26*26 tags (aA..zZ),
  // level 2 the next 26*26*26 (aAA..zZZ), and so on.
  std::size_t remaining = index;
  int minors = 1;
  std::size_t capacity = 26 * 26;
  while (remaining >= capacity) {
    remaining -= capacity;
    ++minors;
    capacity *= 26;
  }
  std::size_t minor_space = capacity / 26;
  std::string out;
  out += static_cast<char>('a' + remaining / minor_space);
  std::size_t rest = remaining % minor_space;
  for (int i = minors - 1; i >= 0; --i) {
    std::size_t unit = 1;
    for (int j = 0; j < i; ++j) unit *= 26;
    out += static_cast<char>('A' + rest / unit);
    rest %= unit;
  }
  return {out};
}

bool rule_options_equal(const RuleOptions& a, const RuleOptions& b) {
  return a.tex_command == b.tex_command && a.tag == b.tag &&
         a.texpos.has_value() == b.texpos.has_value() &&
         (!a.texpos || *a.texpos == *b.texpos) &&
         a.pspos.has_value() == b.pspos.has_value() && (!a.pspos || *a.pspos == *b.pspos) &&
         a.scale == b.scale && a.rot_deg == b.rot_deg && a.shift_x == b.shift_x &&
         a.shift_y == b.shift_y;
}

namespace {

// Decoded contents of every (...) literal inside a byte blob. Comments are
// skipped; a truncated escape or missing ')' just ends the scan — this only
// feeds the collision-avoidance set, over-collecting is harmless.
void collect_string_tokens(const std::string& bytes, std::set<std::string>& out) {
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const char c = bytes[pos];
    if (c == '%') {
      const std::size_t eol = bytes.find('\n', pos);
      pos = eol == std::string::npos ? bytes.size() : eol + 1;
      continue;
    }
    if (c != '(') {
      ++pos;
      continue;
    }
    ++pos;
    int depth = 1;
    std::string text;
    while (pos < bytes.size()) {
      char d = bytes[pos++];
      if (d == '\\') {
        if (pos >= bytes.size()) break;
        char e = bytes[pos++];
        switch (e) {
          case 'n': text += '\n'; break;
          case 'r': text += '\r'; break;
          case 't': text += '\t'; break;
          case 'b': text += '\b'; break;
          case 'f': text += '\f'; break;
          case '\r':
            if (pos < bytes.size() && bytes[pos] == '\n') ++pos;
            break;
          case '\n': break;
          default:
            if (e >= '0' && e <= '7') {
              int value = e - '0';
              for (int i = 0; i < 2 && pos < bytes.size(); ++i) {
                char dig = bytes[pos];
                if (dig < '0' || dig > '7') break;
                value = value * 8 + (dig - '0');
                ++pos;
              }
              text += static_cast<char>(value & 0xFF);
            } else {
              text += e;
            }
        }
        continue;
      }
      if (d == '(') ++depth;
      if (d == ')' && --depth == 0) {
        out.insert(text);
        break;
      }
      if (depth > 0 && d != '(') text += d;
      if (d == '(') text += d;
    }
  }
}

PsfragRule resolve_rule(const Tag& tag, const std::string& latex, const RuleOptions& opts) {
  PsfragRule rule;
  rule.tag = tag.value;
  rule.latex = latex;
  rule.texpos = opts.texpos.value_or(AlignCode{});
  rule.pspos = opts.pspos.value_or(rule.texpos);  // CopyTeXPosition
  rule.scale = opts.scale;
  rule.rot_deg = opts.rot_deg;
  rule.shift_x = opts.shift_x;
  rule.shift_y = opts.shift_y;
  return rule;
}

struct Group {
  std::string text;
  std::string latex;
  RuleOptions options;
  std::vector<std::size_t> primitive_indices;
};

}  // namespace

SubstitutionResult substitute_labels(const EpsDocument& doc,
                                     const std::vector<RulePrecursor>& precursors) {
  SubstitutionResult result;
  result.doc = doc;

  std::vector<TextPrimitive*> prims = result.doc.text_primitives();

  // Last precursor targeting a primitive wins.
  std::vector<const RulePrecursor*> chosen(prims.size(), nullptr);
  for (const RulePrecursor& p : precursors) {
    if (p.primitive_index >= prims.size())
      throw Error(ErrorCode::ParseFailure,
                  "rule targets text primitive " + std::to_string(p.primitive_index) +
                      " but the document has only " + std::to_string(prims.size()));
    chosen[p.primitive_index] = &p;
  }

  std::vector<Group> groups;
  for (std::size_t i = 0; i < prims.size(); ++i) {
    if (!chosen[i]) continue;
    const RulePrecursor& p = *chosen[i];
    Group* match = nullptr;
    for (Group& g : groups) {
      if (g.text == prims[i]->text && g.latex == p.latex &&
          rule_options_equal(g.options, p.options)) {
        match = &g;
        break;
      }
    }
    if (!match) {
      groups.push_back({prims[i]->text, p.latex, p.options, {}});
      match = &groups.back();
    }
    match->primitive_indices.push_back(i);
  }

  // Strings a tag may never equal: labels that survive substitution and
  // every string literal hiding in opaque content.
  std::set<std::string> forbidden;
  for (std::size_t i = 0; i < prims.size(); ++i)
    if (!chosen[i]) forbidden.insert(prims[i]->text);
  for (const Element& e : result.doc.elements)
    if (const auto* chunk = std::get_if<OpaqueChunk>(&e))
      collect_string_tokens(chunk->bytes, forbidden);

  std::set<std::string> explicit_tags;
  for (const Group& g : groups) {
    if (!g.options.tag) continue;
    const std::string& t = *g.options.tag;
    if (!is_valid_tag(t))
      throw Error(ErrorCode::ParseFailure, "requested tag \"" + t + "\" is not alphanumeric");
    if (forbidden.count(t))
      throw Error(ErrorCode::TagCollision,
                  "requested tag \"" + t + "\" collides with text kept in the document");
    if (!explicit_tags.insert(t).second)
      throw Error(ErrorCode::TagCollision,
                  "tag \"" + t + "\" requested for two different replacement rules");
  }

  std::set<std::string> used;
  std::size_t next_index = 0;
  for (const Group& g : groups) {
    Tag tag;
    if (g.options.tag) {
      tag.value = *g.options.tag;
    } else {
      for (;;) {
        tag = allocate_tag(next_index++);
        if (!forbidden.count(tag.value) && !explicit_tags.count(tag.value) &&
            !used.count(tag.value))
          break;
      }
    }
    used.insert(tag.value);

    TagMapEntry entry;
    entry.tag = tag;
    entry.original = *prims[g.primitive_indices.front()];
    entry.primitive_indices = g.primitive_indices;
    entry.rule = resolve_rule(tag, g.latex, g.options);
    for (std::size_t idx : g.primitive_indices) prims[idx]->set_text(tag.value);
    result.map.entries.push_back(std::move(entry));
  }

  return result;
}

}  // namespace psforge
