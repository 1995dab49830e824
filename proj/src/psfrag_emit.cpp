#include "psforge/psfrag_emit.hpp"

#include <set>

#include "psforge/errors.hpp"
#include "psforge/texgen.hpp"

namespace psforge {

std::string emit_psfrag_line(const PsfragRule& rule) {
  std::string body = rule.latex;
  const double dy = tex_dimension_to_bp(rule.shift_y);
  if (dy != 0.0) body = "\\raisebox{" + rule.shift_y + "}{" + body + "}";
  const double dx = tex_dimension_to_bp(rule.shift_x);
  if (dx != 0.0) body = "\\hspace*{" + rule.shift_x + "}" + body;

  return "\\psfrag{" + rule.tag + "}[" + rule.texpos.str() + "][" + rule.pspos.str() + "][" +
         format_number(rule.scale) + "][" + format_number(rule.rot_deg) + "]{" + body + "}";
}

std::string emit_psfrag_file(const std::vector<PsfragRule>& rules) {
  std::set<std::string> seen;
  for (const PsfragRule& rule : rules)
    if (!seen.insert(rule.tag).second)
      throw Error(ErrorCode::DuplicateTag, "tag \"" + rule.tag + "\" appears twice");

  std::string out =
      "% psfrag replacement rules generated by psforge.\n"
      "% Do not edit; regenerate from the source graphic instead.\n";
  for (const PsfragRule& rule : rules) {
    out += emit_psfrag_line(rule);
    out += '\n';
  }
  return out;
}

std::string psfrags_environment(const std::string& tex_file, const std::string& eps_file,
                                const std::string& graphics_options) {
  std::string include = "\\includegraphics";
  if (!graphics_options.empty()) include += "[" + graphics_options + "]";
  include += "{" + eps_file + "}";
  return "\\begin{psfrags}\n  \\input{" + tex_file + "}\n  " + include + "\n\\end{psfrags}\n";
}

std::string emit_include_snippet(const std::string& basename, SnippetMode mode) {
  switch (mode) {
    case SnippetMode::PsfragEnv:
      return psfrags_environment(basename + kDefaultTexSuffix, basename + kDefaultEpsSuffix, "");
    case SnippetMode::PstPdfPreamble:
      return "\\usepackage[notightpage]{pst-pdf}\n";
    case SnippetMode::PdfContainerRename:
      return "\\usepackage{pst-pdf}\n\\renewcommand{PDFcontainer}{" + basename + "-pics.pdf}\n";
  }
  return {};
}

}  // namespace psforge
