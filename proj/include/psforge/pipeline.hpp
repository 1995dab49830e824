#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "psforge/eps_model.hpp"
#include "psforge/geometry.hpp"

namespace psforge {

// Explicit tool locations; empty fields fall back to the PSFORGE_LATEX /
// PSFORGE_DVIPS / PSFORGE_GS environment variables and then a PATH search.
struct ToolchainPaths {
  std::filesystem::path latex;
  std::filesystem::path dvips;
  std::filesystem::path gs;
};

struct ResolvedToolchain {
  std::filesystem::path latex;
  std::filesystem::path dvips;
  std::filesystem::path gs;
};

// Throws Error{ToolNotFound} naming the first missing tool.
ResolvedToolchain resolve_toolchain(const ToolchainPaths& paths = {});
std::optional<ResolvedToolchain> try_resolve_toolchain(const ToolchainPaths& paths = {});

enum class OutputFormat { Eps, Pdf };

struct PreviewDevice {
  bool enabled = false;
  int dpi = 72;
  static PreviewDevice none() { return {}; }
  static PreviewDevice png_rgb(int dpi = 72) { return {true, dpi}; }
};

struct BboxMethod {
  enum class Kind { RasterScan, GsBbox };
  Kind kind = Kind::RasterScan;
  int dpi = 300;            // RasterScan only
  double threshold = 0.95;  // RasterScan: luminance < threshold counts as ink
};

struct RenderJob {
  std::string basename;
  std::filesystem::path eps_path;  // tagged EPS
  std::filesystem::path tex_path;  // psfrag rules file
  std::vector<OutputFormat> output_formats = {OutputFormat::Eps, OutputFormat::Pdf};
  std::string include_graphics_options;  // e.g. "width=7cm"
  std::string tex_preamble;              // extra preamble lines for the driver
  std::string dvips_options = "-Ppdf";
  PreviewDevice preview_device = PreviewDevice::png_rgb();
  BboxMethod bbox_method;
  ToolchainPaths toolchain;
  bool dry_run = false;
};

struct StageLog {
  std::string stage;  // "latex", "dvips", "gs-bbox", "gs-eps", "gs-pdf", "gs-preview"
  std::string command;
  int exit_code = 0;
  std::string log_text;
};

struct RenderResult {
  std::vector<std::filesystem::path> produced;
  std::optional<BBox> measured_bbox;
  std::vector<StageLog> logs;
  std::vector<std::string> hints;
  std::filesystem::path driver_path;
  std::optional<std::filesystem::path> preview_path;
  std::filesystem::path work_dir;
};

// Grayscale raster, row 0 at the top, samples in [0, 1] (1 = white).
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;
  double at(int col, int row) const { return pixels[static_cast<size_t>(row) * width + col]; }
};

// The wrapper document fed to latex: psfrags environment around an
// \includegraphics of the tagged EPS.
std::string build_driver_tex(const RenderJob& job);

// Runs latex -> dvips -> bbox measurement -> DSC rewrite -> ghostscript
// conversions. dry_run validates inputs, resolves nothing, runs nothing,
// and reports the files a real run would produce. Throws
// Error{StageFailed} with hints on tool failure.
RenderResult unpsfrag(const RenderJob& job);

// Tight bounding box of the ink in a raster rendered at `dpi`, in
// PostScript points with a one-pixel safety margin clamped to the page.
BBox measure_bbox(const Raster& raster, int dpi, double threshold = 0.95);

// Ink extent before the margin is applied: {min_x, min_y, max_x, max_y}
// of the ink pixel rectangle footprint in points.
std::optional<BBox> ink_hull_points(const Raster& raster, int dpi, double threshold = 0.95);

// Extracts %%HiResBoundingBox (preferred) or %%BoundingBox from gs -sDEVICE=bbox output.
BBox parse_gs_bbox_output(const std::string& text);

// The fast alternative: ghostscript's bbox device on the rendered
// PostScript. Known to be less reliable than the raster scan.
BBox measure_bbox_gs(const RenderJob& job, const std::filesystem::path& ps_file);

// PNG preview of the cropped render; no-op returning nullopt when the
// device is disabled.
std::optional<std::filesystem::path> generate_preview(const std::filesystem::path& ps_file,
                                                      const PreviewDevice& device,
                                                      const std::filesystem::path& out_png,
                                                      const ResolvedToolchain& tools);

// PGM (P5, maxval <= 65535) loader for gs pgmraw output.
Raster load_pgm(const std::filesystem::path& path);

// Binary-safe: rewrites only the %%BoundingBox / %%HiResBoundingBox header
// lines (adding the HiRes line when absent) and stamps an EPSF-3.0 version
// on the signature line if missing. The body is untouched.
std::string rewrite_dsc_bbox(const std::string& ps_bytes, const BBox& bbox);

}  // namespace psforge
