#include "psforge/pipeline.hpp"

#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "psforge/errors.hpp"
#include "psforge/psfrag_emit.hpp"

namespace psforge {

namespace fs = std::filesystem;

namespace {

bool is_executable_file(const fs::path& p) {
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) return false;
  return ::access(p.c_str(), X_OK) == 0;
}

std::optional<fs::path> search_path(const std::string& name) {
  const char* path = std::getenv("PATH");
  if (!path) return std::nullopt;
  std::stringstream ss{std::string(path)};
  std::string dir;
  while (std::getline(ss, dir, ':')) {
    if (dir.empty()) continue;
    fs::path candidate = fs::path(dir) / name;
    if (is_executable_file(candidate)) return fs::absolute(candidate);
  }
  return std::nullopt;
}

fs::path resolve_tool(const fs::path& given, const char* env_var, const char* name,
                      const char* stage) {
  fs::path candidate = given;
  if (candidate.empty()) {
    if (const char* env = std::getenv(env_var); env && *env) candidate = env;
  }
  if (!candidate.empty()) {
    if (candidate.is_absolute() || candidate.has_parent_path()) {
      // The stage runner chdirs into the work dir, so a relative path that
      // validated here would no longer resolve at exec time.
      if (is_executable_file(candidate)) return fs::absolute(candidate);
      throw ToolNotFoundError(stage, std::string(name) + " not executable at \"" +
                                         candidate.string() + "\"");
    }
    if (auto found = search_path(candidate.string())) return *found;
    throw ToolNotFoundError(stage,
                            "\"" + candidate.string() + "\" not found in PATH for " + name);
  }
  if (auto found = search_path(name)) return *found;
  throw ToolNotFoundError(stage, std::string(name) + " not found: set PSFORGE_" +
                                     (stage == std::string("gs") ? "GS"
                                      : stage == std::string("dvips") ? "DVIPS"
                                                                      : "LATEX") +
                                     " or install it into PATH");
}

std::string read_file_or_empty(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string read_file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read \"" + p.string() + "\"");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write \"" + p.string() + "\"");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "short write to \"" + p.string() + "\"");
}

std::vector<std::string> split_options(const std::string& opts) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : opts) {
    if (c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string join_argv(const std::vector<std::string>& argv) {
  std::string out;
  for (std::size_t i = 0; i < argv.size(); ++i) {
    if (i) out += ' ';
    out += argv[i];
  }
  return out;
}

struct RunOutcome {
  int exit_code = -1;
  std::string output;  // merged stdout + stderr
};

RunOutcome run_process(const std::vector<std::string>& argv, const fs::path& cwd,
                       const fs::path& log_file) {
  std::vector<char*> cargv;
  cargv.reserve(argv.size() + 1);
  for (const std::string& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) throw Error(ErrorCode::StageFailed, "fork failed");
  if (pid == 0) {
    // Open the log before chdir: a relative log path must resolve against
    // the invoker's cwd, where the parent reads it back.
    FILE* log = std::fopen(log_file.c_str(), "wb");
    if (log) {
      ::dup2(fileno(log), STDOUT_FILENO);
      ::dup2(fileno(log), STDERR_FILENO);
      std::fclose(log);
    }
    if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) ::_exit(126);
    ::execv(cargv[0], cargv.data());
    ::_exit(127);
  }
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) throw Error(ErrorCode::StageFailed, "waitpid failed");
  }
  RunOutcome out;
  if (WIFEXITED(status))
    out.exit_code = WEXITSTATUS(status);
  else if (WIFSIGNALED(status))
    out.exit_code = 128 + WTERMSIG(status);
  out.output = read_file_or_empty(log_file);
  return out;
}

std::vector<std::string> hints_from_log(const std::string& log) {
  std::vector<std::string> hints;
  if (log.find("! LaTeX Error: File") != std::string::npos) {
    hints.push_back(
        "a LaTeX package or file used by the replacements is missing; "
        "install it or drop the \\usepackage from the preamble");
  } else if (log.find("\n! ") != std::string::npos || log.rfind("! ", 0) == 0) {
    hints.push_back(
        "LaTeX rejected the input; a replacement label is probably malformed LaTeX — "
        "check the \\psfrag bodies in the rules file");
  }
  return hints;
}

struct StageRunner {
  const fs::path& work_dir;
  std::vector<StageLog>& logs;

  std::string run(const std::string& stage, const std::vector<std::string>& argv,
                  const std::vector<fs::path>& must_exist) {
    const fs::path log_file = work_dir / (stage + ".log");
    RunOutcome outcome = run_process(argv, work_dir, log_file);
    logs.push_back({stage, join_argv(argv), outcome.exit_code, outcome.output});
    std::string missing;
    for (const fs::path& p : must_exist) {
      std::error_code ec;
      if (!fs::exists(p, ec)) missing = p.string();
    }
    if (outcome.exit_code != 0 || !missing.empty()) {
      std::string log_text = outcome.output;
      std::string message = "stage \"" + stage + "\" failed";
      if (outcome.exit_code != 0)
        message += " with exit code " + std::to_string(outcome.exit_code);
      if (!missing.empty()) message += " (expected output \"" + missing + "\" missing)";
      throw StageFailedError(stage, log_text, hints_from_log(log_text), message);
    }
    return outcome.output;
  }
};

}  // namespace

ResolvedToolchain resolve_toolchain(const ToolchainPaths& paths) {
  ResolvedToolchain out;
  out.latex = resolve_tool(paths.latex, "PSFORGE_LATEX", "latex", "latex");
  out.dvips = resolve_tool(paths.dvips, "PSFORGE_DVIPS", "dvips", "dvips");
  out.gs = resolve_tool(paths.gs, "PSFORGE_GS", "gs", "gs");
  return out;
}

std::optional<ResolvedToolchain> try_resolve_toolchain(const ToolchainPaths& paths) {
  try {
    return resolve_toolchain(paths);
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::string build_driver_tex(const RenderJob& job) {
  std::string out = "\\documentclass{article}\n\\usepackage{psfrag,graphicx}\n";
  if (!job.tex_preamble.empty()) {
    out += job.tex_preamble;
    if (job.tex_preamble.back() != '\n') out += '\n';
  }
  out += "\\pagestyle{empty}\n\\begin{document}\n";
  out += psfrags_environment(job.tex_path.filename().string(), job.eps_path.filename().string(),
                             job.include_graphics_options);
  out += "\\end{document}\n";
  return out;
}

namespace {

struct PixelHull {
  int c0, r0, c1, r1;  // inclusive ink extremes
};

std::optional<PixelHull> ink_pixel_hull(const Raster& raster, double threshold) {
  PixelHull h{raster.width, raster.height, -1, -1};
  for (int r = 0; r < raster.height; ++r) {
    for (int c = 0; c < raster.width; ++c) {
      if (raster.at(c, r) < threshold) {
        h.c0 = std::min(h.c0, c);
        h.c1 = std::max(h.c1, c);
        h.r0 = std::min(h.r0, r);
        h.r1 = std::max(h.r1, r);
      }
    }
  }
  if (h.c1 < 0) return std::nullopt;
  return h;
}

// Pixel (c, r) with row 0 at the top covers x in [c, c+1] and
// y in [H-r-1, H-r], both times 72/dpi points.
BBox hull_to_points(const PixelHull& h, int page_height, int dpi) {
  const double scale = 72.0 / dpi;
  return {h.c0 * scale, (page_height - h.r1 - 1) * scale, (h.c1 + 1) * scale,
          (page_height - h.r0) * scale};
}

}  // namespace

BBox measure_bbox(const Raster& raster, int dpi, double threshold) {
  auto hull = ink_pixel_hull(raster, threshold);
  if (!hull) throw Error(ErrorCode::AllEmpty, "page is fully blank; the render produced no ink");
  const PixelHull margined{std::max(0, hull->c0 - 1), std::max(0, hull->r0 - 1),
                           std::min(raster.width - 1, hull->c1 + 1),
                           std::min(raster.height - 1, hull->r1 + 1)};
  return hull_to_points(margined, raster.height, dpi);
}

std::optional<BBox> ink_hull_points(const Raster& raster, int dpi, double threshold) {
  auto hull = ink_pixel_hull(raster, threshold);
  if (!hull) return std::nullopt;
  return hull_to_points(*hull, raster.height, dpi);
}

BBox parse_gs_bbox_output(const std::string& text) {
  auto parse_line = [&](std::string_view prefix) -> std::optional<BBox> {
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t eol = text.find('\n', pos);
      if (eol == std::string::npos) eol = text.size();
      std::string_view line(text.data() + pos, eol - pos);
      if (line.substr(0, prefix.size()) == prefix) {
        std::string args(line.substr(prefix.size()));
        double v[4];
        char* p = args.data();
        bool ok = true;
        for (int i = 0; i < 4; ++i) {
          char* endp = nullptr;
          v[i] = std::strtod(p, &endp);
          if (endp == p) ok = false;
          p = endp;
        }
        if (ok) return BBox{v[0], v[1], v[2], v[3]};
      }
      pos = eol + 1;
    }
    return std::nullopt;
  };
  if (auto hires = parse_line("%%HiResBoundingBox:")) return *hires;
  if (auto lores = parse_line("%%BoundingBox:")) return *lores;
  throw Error(ErrorCode::ParseFailure, "no %%(HiRes)BoundingBox line in bbox device output");
}

Raster load_pgm(const std::filesystem::path& path) {
  const std::string bytes = read_file_bytes(path);
  std::size_t pos = 0;
  auto next_field = [&]() -> std::string {
    for (;;) {
      while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  };

  if (next_field() != "P5")
    throw Error(ErrorCode::ParseFailure, "\"" + path.string() + "\" is not a P5 PGM file");
  Raster raster;
  int maxval = 0;
  try {
    raster.width = std::stoi(next_field());
    raster.height = std::stoi(next_field());
    maxval = std::stoi(next_field());
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseFailure, "malformed PGM header in \"" + path.string() + "\"");
  }
  if (raster.width <= 0 || raster.height <= 0 || maxval <= 0 || maxval > 65535)
    throw Error(ErrorCode::ParseFailure, "unsupported PGM geometry in \"" + path.string() + "\"");
  ++pos;  // single whitespace after maxval

  const std::size_t count = static_cast<std::size_t>(raster.width) * raster.height;
  const int sample_bytes = maxval < 256 ? 1 : 2;
  if (bytes.size() - pos < count * sample_bytes)
    throw Error(ErrorCode::ParseFailure, "truncated PGM data in \"" + path.string() + "\"");
  raster.pixels.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    unsigned value;
    if (sample_bytes == 1) {
      value = static_cast<unsigned char>(bytes[pos + i]);
    } else {
      value = (static_cast<unsigned char>(bytes[pos + 2 * i]) << 8) |
              static_cast<unsigned char>(bytes[pos + 2 * i + 1]);
    }
    raster.pixels[i] = static_cast<double>(value) / maxval;
  }
  return raster;
}

std::string rewrite_dsc_bbox(const std::string& ps_bytes, const BBox& bbox) {
  const std::string bbox_line =
      "%%BoundingBox: " + std::to_string(static_cast<long long>(std::floor(bbox.llx))) + " " +
      std::to_string(static_cast<long long>(std::floor(bbox.lly))) + " " +
      std::to_string(static_cast<long long>(std::ceil(bbox.urx))) + " " +
      std::to_string(static_cast<long long>(std::ceil(bbox.ury)));
  auto hires_num = [](double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
  };
  const std::string hires_line = "%%HiResBoundingBox: " + hires_num(bbox.llx) + " " +
                                 hires_num(bbox.lly) + " " + hires_num(bbox.urx) + " " +
                                 hires_num(bbox.ury);

  std::string out;
  out.reserve(ps_bytes.size() + 64);
  std::size_t pos = 0;
  bool in_header = true;
  bool first_line = true;
  bool wrote_bbox = false;
  bool wrote_hires = false;
  while (pos < ps_bytes.size() && in_header) {
    std::size_t eol = ps_bytes.find('\n', pos);
    const std::size_t end = eol == std::string::npos ? ps_bytes.size() : eol + 1;
    std::string_view raw(ps_bytes.data() + pos, end - pos);
    std::string_view content = raw;
    while (!content.empty() && (content.back() == '\n' || content.back() == '\r'))
      content.remove_suffix(1);
    const std::string terminator(raw.substr(content.size()));

    if (first_line) {
      first_line = false;
      if (content.substr(0, 10) == "%!PS-Adobe" && content.find("EPSF") == std::string_view::npos) {
        out += "%!PS-Adobe-3.0 EPSF-3.0" + terminator;
      } else {
        out += std::string(raw);
      }
      pos = end;
      continue;
    }
    if (content.empty() || content[0] != '%' ||
        content.substr(0, 13) == "%%EndComments") {
      in_header = false;
      if (!wrote_bbox) {
        out += bbox_line + "\n" + hires_line + "\n";
        wrote_bbox = wrote_hires = true;
      } else if (!wrote_hires) {
        out += hires_line + "\n";
        wrote_hires = true;
      }
      break;  // copy the rest verbatim below
    }
    if (!wrote_bbox && content.substr(0, 14) == "%%BoundingBox:") {
      out += bbox_line + terminator;
      wrote_bbox = true;
      pos = end;
      continue;
    }
    if (content.substr(0, 20) == "%%HiResBoundingBox:") {
      if (!wrote_hires) {
        out += hires_line + terminator;
        wrote_hires = true;
      }
      pos = end;
      continue;
    }
    out += std::string(raw);
    pos = end;
  }
  out += ps_bytes.substr(pos);
  return out;
}

BBox measure_bbox_gs(const RenderJob& job, const std::filesystem::path& ps_file) {
  const ResolvedToolchain tools = resolve_toolchain(job.toolchain);
  const fs::path work_dir = ps_file.parent_path();
  std::vector<StageLog> logs;
  StageRunner runner{work_dir, logs};
  const std::string output =
      runner.run("gs-bbox",
                 {tools.gs.string(), "-dNOPAUSE", "-dBATCH", "-dSAFER", "-sDEVICE=bbox",
                  fs::absolute(ps_file).string()},
                 {});
  return parse_gs_bbox_output(output);
}

std::optional<std::filesystem::path> generate_preview(const std::filesystem::path& ps_file,
                                                      const PreviewDevice& device,
                                                      const std::filesystem::path& out_png,
                                                      const ResolvedToolchain& tools) {
  if (!device.enabled) return std::nullopt;
  std::vector<StageLog> logs;
  StageRunner runner{ps_file.parent_path(), logs};
  runner.run("gs-preview",
             {tools.gs.string(), "-q", "-dNOPAUSE", "-dBATCH", "-dSAFER", "-sDEVICE=png16m",
              "-r" + std::to_string(device.dpi), "-dEPSCrop",
              "-sOutputFile=" + fs::absolute(out_png).string(),
              fs::absolute(ps_file).string()},
             {fs::absolute(out_png)});
  return out_png;
}

RenderResult unpsfrag(const RenderJob& job) {
  if (job.output_formats.empty())
    throw Error(ErrorCode::ParseFailure, "render job requests no output formats");
  if (job.bbox_method.dpi <= 0 || (job.preview_device.enabled && job.preview_device.dpi <= 0))
    throw Error(ErrorCode::ParseFailure, "raster resolution must be positive");
  if (job.bbox_method.threshold <= 0.0 || job.bbox_method.threshold >= 1.0)
    throw Error(ErrorCode::ParseFailure, "ink threshold must lie strictly between 0 and 1");
  for (const fs::path& p : {job.eps_path, job.tex_path}) {
    std::error_code ec;
    if (!fs::is_regular_file(p, ec))
      throw Error(ErrorCode::IoError, "input file \"" + p.string() + "\" does not exist");
  }

  RenderResult result;
  const fs::path out_base(job.basename);
  const fs::path out_dir =
      out_base.has_parent_path() ? out_base.parent_path() : fs::path(".");
  const fs::path work_dir = out_dir / (out_base.filename().string() + ".psforge-tmp");
  std::error_code ec;
  fs::remove_all(work_dir, ec);
  fs::create_directories(work_dir);
  result.work_dir = work_dir;

  fs::copy_file(job.eps_path, work_dir / job.eps_path.filename(),
                fs::copy_options::overwrite_existing);
  fs::copy_file(job.tex_path, work_dir / job.tex_path.filename(),
                fs::copy_options::overwrite_existing);
  result.driver_path = work_dir / "driver.tex";
  write_file_bytes(result.driver_path, build_driver_tex(job));

  const fs::path out_eps = fs::path(job.basename + ".eps");
  const fs::path out_pdf = fs::path(job.basename + ".pdf");
  const fs::path out_preview = fs::path(job.basename + "-preview.png");

  if (job.dry_run) {
    // Report what a real run would produce; nothing was invoked, the
    // work directory is left in place for inspection.
    for (OutputFormat f : job.output_formats)
      result.produced.push_back(f == OutputFormat::Eps ? out_eps : out_pdf);
    if (job.preview_device.enabled) result.preview_path = out_preview;
    return result;
  }

  const ResolvedToolchain tools = resolve_toolchain(job.toolchain);
  StageRunner runner{work_dir, result.logs};

  runner.run("latex",
             {tools.latex.string(), "-interaction=nonstopmode", "driver.tex"},
             {work_dir / "driver.dvi"});

  std::vector<std::string> dvips_argv = {tools.dvips.string()};
  for (std::string& opt : split_options(job.dvips_options)) dvips_argv.push_back(std::move(opt));
  dvips_argv.push_back("-o");
  dvips_argv.push_back("driver.ps");
  dvips_argv.push_back("driver.dvi");
  runner.run("dvips", dvips_argv, {work_dir / "driver.ps"});

  BBox measured{};
  if (job.bbox_method.kind == BboxMethod::Kind::GsBbox) {
    const std::string output = runner.run(
        "gs-bbox",
        {tools.gs.string(), "-dNOPAUSE", "-dBATCH", "-dSAFER", "-sDEVICE=bbox", "driver.ps"},
        {});
    measured = parse_gs_bbox_output(output);
  } else {
    runner.run("gs-raster",
               {tools.gs.string(), "-q", "-dNOPAUSE", "-dBATCH", "-dSAFER", "-sDEVICE=pgmraw",
                "-r" + std::to_string(job.bbox_method.dpi), "-sOutputFile=raster.pgm",
                "driver.ps"},
               {work_dir / "raster.pgm"});
    measured = measure_bbox(load_pgm(work_dir / "raster.pgm"), job.bbox_method.dpi,
                            job.bbox_method.threshold);
  }
  result.measured_bbox = measured;

  const fs::path cropped = work_dir / "cropped.ps";
  write_file_bytes(cropped, rewrite_dsc_bbox(read_file_bytes(work_dir / "driver.ps"), measured));

  for (OutputFormat format : job.output_formats) {
    if (format == OutputFormat::Eps) {
      runner.run("gs-eps",
                 {tools.gs.string(), "-q", "-dNOPAUSE", "-dBATCH", "-dSAFER",
                  "-sDEVICE=eps2write", "-dEPSCrop",
                  "-sOutputFile=" + fs::absolute(out_eps).string(), "cropped.ps"},
                 {fs::absolute(out_eps)});
      result.produced.push_back(out_eps);
    } else {
      runner.run("gs-pdf",
                 {tools.gs.string(), "-q", "-dNOPAUSE", "-dBATCH", "-dSAFER",
                  "-sDEVICE=pdfwrite", "-dEPSCrop", "-dAutoRotatePages=/None",
                  "-sOutputFile=" + fs::absolute(out_pdf).string(), "cropped.ps"},
                 {fs::absolute(out_pdf)});
      result.produced.push_back(out_pdf);
    }
  }

  if (job.preview_device.enabled) {
    StageRunner preview_runner{work_dir, result.logs};
    preview_runner.run("gs-preview",
                       {tools.gs.string(), "-q", "-dNOPAUSE", "-dBATCH", "-dSAFER",
                        "-sDEVICE=png16m", "-r" + std::to_string(job.preview_device.dpi),
                        "-dEPSCrop", "-sOutputFile=" + fs::absolute(out_preview).string(),
                        "cropped.ps"},
                       {fs::absolute(out_preview)});
    result.preview_path = out_preview;
  }

  fs::remove_all(work_dir, ec);  // retained only on failure
  return result;
}

}  // namespace psforge
