#pragma once

#include <string>
#include <vector>

#include "psforge/placement.hpp"

namespace psforge {

inline constexpr const char* kDefaultTexSuffix = "-psfrag.tex";
inline constexpr const char* kDefaultEpsSuffix = "-psfrag.eps";

// One \psfrag{tag}[texpos][pspos][scale][rot]{latex} line. All four
// optional arguments are always written so output is byte-deterministic;
// nonzero shifts wrap the body in \hspace*{..}/\raisebox{..}{..}.
std::string emit_psfrag_line(const PsfragRule& rule);

// Complete replacement file: generated-file comment header, one line per
// rule in input order, LF endings, trailing newline. Throws
// Error{DuplicateTag}.
std::string emit_psfrag_file(const std::vector<PsfragRule>& rules);

// The psfrags environment wrapping an \input of the rules file and the
// \includegraphics of the tagged image.
std::string psfrags_environment(const std::string& tex_file, const std::string& eps_file,
                                const std::string& graphics_options);

enum class SnippetMode {
  PsfragEnv,           // manuscript inclusion for the PostScript-only workflow
  PstPdfPreamble,      // pst-pdf preamble line (notightpage)
  PdfContainerRename,  // image-container rename for renamed manuscripts
};

std::string emit_include_snippet(const std::string& basename, SnippetMode mode);

}  // namespace psforge
