#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "psforge/eps_model.hpp"
#include "psforge/pipeline.hpp"
#include "psforge/placement.hpp"
#include "psforge/psfrag_emit.hpp"
#include "psforge/taggin.hpp"

namespace psforge {

struct ExportOptions {
  std::optional<std::filesystem::path> rules_file;
  bool manual = false;  // only labels named in the rules file are replaced
  std::string tex_suffix = kDefaultTexSuffix;
  std::string eps_suffix = kDefaultEpsSuffix;
};

struct ExportOutput {
  std::filesystem::path tagged_eps;
  std::filesystem::path psfrag_tex;
  std::filesystem::path manifest;
  TagMap tag_map;
};

ExportOutput cmd_export(const std::filesystem::path& eps_in, const std::string& basename,
                        const ExportOptions& opts = {});

struct UnpsfragFlags {
  std::vector<OutputFormat> output_formats = {OutputFormat::Eps, OutputFormat::Pdf};
  std::string include_graphics_options;
  std::string tex_preamble;
  std::string dvips_options = "-Ppdf";
  PreviewDevice preview_device = PreviewDevice::png_rgb();
  BboxMethod bbox_method;
  ToolchainPaths toolchain;
  bool dry_run = false;
};

RenderResult cmd_unpsfrag(const std::string& basename, const std::filesystem::path& eps,
                          const std::filesystem::path& tex, const UnpsfragFlags& flags = {});

// mode: "psfrag-env" | "pst-pdf" | "pdfcontainer". Throws Error{UnknownMode}.
std::string cmd_snippet(const std::string& basename, const std::string& mode);

// Alignment guess for automatic mode: anchors near the left edge of the
// figure box are right-aligned baseline labels (axis labels left of an
// axis), near the right edge left-aligned, otherwise centered.
AlignCode derive_texpos(Point anchor, double slope_deg, const BBox& figure_box);

std::vector<LabelRule> load_rules_file(const std::filesystem::path& path);

// Matches rules against the document's text primitives. automatic=true adds
// default rules for unmatched labels; automatic=false (manual mode) throws
// Error{MissingAlignment} on a rule without texpos and leaves unmatched
// labels alone.
std::vector<RulePrecursor> bind_rules(const EpsDocument& doc, const std::vector<LabelRule>& rules,
                                      bool automatic);

int exit_code_for(const Error& err);

// Full argv dispatch; returns the process exit status.
int run_cli(int argc, const char* const* argv);

}  // namespace psforge
