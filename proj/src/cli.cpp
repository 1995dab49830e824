#include "psforge/cli.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "psforge/psfrag_emit.hpp"
#include "psforge/texgen.hpp"
#include "psforge/ticks.hpp"

namespace psforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

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

// LaTeX for a label the rules file did not override: numeric text becomes a
// math-mode number keeping the source's decimal digits ("1." gains the
// missing digit), anything else passes through verbatim.
std::string auto_latex(const std::string& text) {
  std::string trimmed = text;
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front())))
    trimmed.erase(trimmed.begin());
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back())))
    trimmed.pop_back();

  if (!trimmed.empty()) {
    char* endp = nullptr;
    const double value = std::strtod(trimmed.c_str(), &endp);
    if (endp == trimmed.c_str() + trimmed.size() && std::isfinite(value)) {
      NumberFormat fmt;
      const std::size_t point = trimmed.find('.');
      if (point != std::string::npos) {
        std::size_t digits = 0;
        for (std::size_t i = point + 1; i < trimmed.size() &&
                                        std::isdigit(static_cast<unsigned char>(trimmed[i]));
             ++i)
          ++digits;
        fmt.min_decimal_digits = static_cast<int>(std::max<std::size_t>(digits, 1));
      }
      return guess_tex(Expr::number(value, fmt));
    }
  }
  return guess_tex(Expr::str(text));
}

std::optional<AlignCode> parse_align_field(const json& obj, const char* key) {
  if (!obj.contains(key)) return std::nullopt;
  if (!obj[key].is_string())
    throw Error(ErrorCode::ParseError, std::string("rules file: \"") + key + "\" must be a string");
  return AlignCode::parse(obj[key].get<std::string>());
}

}  // namespace

std::vector<LabelRule> load_rules_file(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file_bytes(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError,
                "rules file \"" + path.string() + "\": " + std::string(e.what()));
  }
  if (!doc.is_array())
    throw Error(ErrorCode::ParseError,
                "rules file \"" + path.string() + "\" must contain a JSON array");

  std::vector<LabelRule> rules;
  for (const json& item : doc) {
    if (!item.is_object())
      throw Error(ErrorCode::ParseError, "rules file: every rule must be a JSON object");
    LabelRule rule;
    if (item.contains("text")) rule.match.text = item["text"].get<std::string>();
    if (item.contains("ordinal")) rule.match.ordinal = item["ordinal"].get<std::size_t>();
    if (!rule.match.text && !rule.match.ordinal)
      throw Error(ErrorCode::ParseError, "rules file: rule needs a \"text\" or \"ordinal\" key");
    if (item.contains("latex")) rule.options.tex_command = item["latex"].get<std::string>();
    if (item.contains("tag")) rule.options.tag = item["tag"].get<std::string>();
    rule.options.texpos = parse_align_field(item, "texpos");
    rule.options.pspos = parse_align_field(item, "pspos");
    if (item.contains("scale")) rule.options.scale = item["scale"].get<double>();
    if (item.contains("rot")) rule.options.rot_deg = item["rot"].get<double>();
    if (item.contains("shift_x")) rule.options.shift_x = item["shift_x"].get<std::string>();
    if (item.contains("shift_y")) rule.options.shift_y = item["shift_y"].get<std::string>();
    if (rule.options.scale <= 0.0)
      throw Error(ErrorCode::ParseError, "rules file: scale must be positive");
    rules.push_back(std::move(rule));
  }
  return rules;
}

AlignCode derive_texpos(Point anchor, double /*slope_deg*/, const BBox& figure_box) {
  const double band = 0.15 * figure_box.width();
  AlignCode code;  // Bl
  if (anchor.x <= figure_box.llx + band) {
    code.horizontal = HAlign::Right;  // label sits left of the axis
  } else if (anchor.x >= figure_box.urx - band) {
    code.horizontal = HAlign::Left;
  } else {
    code.horizontal = HAlign::Center;
  }
  return code;
}

std::vector<RulePrecursor> bind_rules(const EpsDocument& doc, const std::vector<LabelRule>& rules,
                                      bool automatic) {
  const std::vector<const TextPrimitive*> prims = doc.text_primitives();
  const BBox figure_box = doc.effective_bbox();

  std::vector<const LabelRule*> matched(prims.size(), nullptr);
  for (const LabelRule& rule : rules) {
    if (rule.match.ordinal) {
      if (*rule.match.ordinal >= prims.size())
        throw Error(ErrorCode::ParseError,
                    "rule ordinal " + std::to_string(*rule.match.ordinal) +
                        " is out of range: the figure has " + std::to_string(prims.size()) +
                        " text labels");
      matched[*rule.match.ordinal] = &rule;
      continue;
    }
    for (std::size_t i = 0; i < prims.size(); ++i)
      if (prims[i]->text == *rule.match.text) matched[i] = &rule;
    // a text selector matching nothing is allowed: tick rules may cover
    // labels that a particular figure does not contain
  }

  std::vector<RulePrecursor> out;
  for (std::size_t i = 0; i < prims.size(); ++i) {
    const LabelRule* rule = matched[i];
    if (!rule && !automatic) continue;

    RulePrecursor pre;
    pre.primitive_index = i;
    if (rule) pre.options = rule->options;
    pre.latex =
        pre.options.tex_command ? *pre.options.tex_command : auto_latex(prims[i]->text);
    if (!pre.options.texpos) {
      if (!automatic)
        throw Error(ErrorCode::MissingAlignment,
                    "manual mode: label \"" + prims[i]->text + "\" has no texpos");
      pre.options.texpos = derive_texpos(prims[i]->anchor, prims[i]->slope_deg, figure_box);
    }
    out.push_back(std::move(pre));
  }
  return out;
}

ExportOutput cmd_export(const std::filesystem::path& eps_in, const std::string& basename,
                        const ExportOptions& opts) {
  const EpsDocument doc = parse_eps(read_file_bytes(eps_in));
  std::vector<LabelRule> rules;
  if (opts.rules_file) rules = load_rules_file(*opts.rules_file);
  const std::vector<RulePrecursor> precursors = bind_rules(doc, rules, !opts.manual);
  SubstitutionResult sub = substitute_labels(doc, precursors);

  ExportOutput out;
  out.tag_map = std::move(sub.map);
  out.tagged_eps = fs::path(basename + opts.eps_suffix);
  out.psfrag_tex = fs::path(basename + opts.tex_suffix);
  out.manifest = fs::path(basename + "-manifest.json");

  std::vector<PsfragRule> psfrag_rules;
  psfrag_rules.reserve(out.tag_map.entries.size());
  for (const TagMapEntry& entry : out.tag_map.entries) psfrag_rules.push_back(entry.rule);

  write_file_bytes(out.tagged_eps, serialize_eps(sub.doc));
  write_file_bytes(out.psfrag_tex, emit_psfrag_file(psfrag_rules));

  json manifest = json::array();
  for (const TagMapEntry& entry : out.tag_map.entries) {
    manifest.push_back({{"tag", entry.tag.value},
                        {"text", entry.original.text},
                        {"latex", entry.rule.latex},
                        {"texpos", entry.rule.texpos.str()},
                        {"pspos", entry.rule.pspos.str()},
                        {"scale", entry.rule.scale},
                        {"rot", entry.rule.rot_deg}});
  }
  write_file_bytes(out.manifest, manifest.dump(2) + "\n");
  return out;
}

RenderResult cmd_unpsfrag(const std::string& basename, const std::filesystem::path& eps,
                          const std::filesystem::path& tex, const UnpsfragFlags& flags) {
  RenderJob job;
  job.basename = basename;
  job.eps_path = eps;
  job.tex_path = tex;
  job.output_formats = flags.output_formats;
  job.include_graphics_options = flags.include_graphics_options;
  job.tex_preamble = flags.tex_preamble;
  job.dvips_options = flags.dvips_options;
  job.preview_device = flags.preview_device;
  job.bbox_method = flags.bbox_method;
  job.toolchain = flags.toolchain;
  job.dry_run = flags.dry_run;
  return unpsfrag(job);
}

std::string cmd_snippet(const std::string& basename, const std::string& mode) {
  if (mode == "psfrag-env") return emit_include_snippet(basename, SnippetMode::PsfragEnv);
  if (mode == "pst-pdf") return emit_include_snippet(basename, SnippetMode::PstPdfPreamble);
  if (mode == "pdfcontainer")
    return emit_include_snippet(basename, SnippetMode::PdfContainerRename);
  throw Error(ErrorCode::UnknownMode,
              "unknown snippet mode \"" + mode + "\" (use psfrag-env, pst-pdf or pdfcontainer)");
}

int exit_code_for(const Error& err) {
  switch (err.code()) {
    case ErrorCode::BadSignature:
    case ErrorCode::MissingBoundingBox:
    case ErrorCode::MalformedString:
    case ErrorCode::UnbalancedGsave:
    case ErrorCode::ParseError:
    case ErrorCode::ParseFailure:
    case ErrorCode::BadAlignCode:
    case ErrorCode::BadDimension:
    case ErrorCode::UnknownMode:
      return 2;
    case ErrorCode::MissingAlignment:
      return 3;
    case ErrorCode::TagCollision:
    case ErrorCode::DuplicateTag:
      return 4;
    case ErrorCode::IoError:
      return 5;
    case ErrorCode::ToolNotFound:
      return 6;
    case ErrorCode::StageFailed:
      return 7;
    case ErrorCode::NonFinite:
    case ErrorCode::EmptyRange:
    case ErrorCode::DegenerateBox:
    case ErrorCode::AllEmpty:
      return 8;
  }
  return 1;
}

namespace {

std::vector<OutputFormat> parse_formats(const std::string& csv) {
  std::vector<OutputFormat> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "eps")
      out.push_back(OutputFormat::Eps);
    else if (item == "pdf")
      out.push_back(OutputFormat::Pdf);
    else if (!item.empty())
      throw Error(ErrorCode::ParseError, "unknown output format \"" + item + "\"");
  }
  if (out.empty()) throw Error(ErrorCode::ParseError, "--formats selected nothing");
  return out;
}

PreviewDevice parse_preview(const std::string& spec) {
  if (spec == "none") return PreviewDevice::none();
  char* endp = nullptr;
  const long dpi = std::strtol(spec.c_str(), &endp, 10);
  if (endp != spec.c_str() + spec.size() || dpi <= 0)
    throw Error(ErrorCode::ParseError,
                "--preview expects \"none\" or a positive dpi, got \"" + spec + "\"");
  return PreviewDevice::png_rgb(static_cast<int>(dpi));
}

// "raster", "raster:<dpi>", "raster:<dpi>:<threshold>" or "gs".
BboxMethod parse_bbox_method(const std::string& spec) {
  BboxMethod method;
  if (spec == "gs") {
    method.kind = BboxMethod::Kind::GsBbox;
    return method;
  }
  std::stringstream ss(spec);
  std::string head;
  std::getline(ss, head, ':');
  if (head != "raster")
    throw Error(ErrorCode::ParseError,
                "--bbox-method expects \"raster[:dpi[:threshold]]\" or \"gs\", got \"" + spec +
                    "\"");
  std::string field;
  if (std::getline(ss, field, ':')) method.dpi = std::stoi(field);
  if (std::getline(ss, field, ':')) method.threshold = std::stod(field);
  return method;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"psforge: LaTeX-quality labels for EPS figures via psfrag"};
  app.require_subcommand(1);

  std::string eps_in;
  std::string basename;
  ExportOptions export_opts;
  std::string rules_file;
  CLI::App* export_cmd = app.add_subcommand("export", "tag labels and emit psfrag files");
  export_cmd->add_option("eps", eps_in, "source EPS figure")->required();
  export_cmd->add_option("basename", basename, "output base name")->required();
  export_cmd->add_option("--rules", rules_file, "JSON rules file with per-label overrides");
  export_cmd->add_flag("--manual", export_opts.manual,
                       "replace only labels named in the rules file; require explicit texpos");
  export_cmd->add_option("--tex-suffix", export_opts.tex_suffix, "suffix of the psfrag file");
  export_cmd->add_option("--eps-suffix", export_opts.eps_suffix, "suffix of the tagged EPS");

  std::string un_basename, un_eps, un_tex;
  UnpsfragFlags un_flags;
  std::string formats = "eps,pdf";
  std::string preview = "72";
  std::string bbox_method = "raster";
  std::string latex_path, dvips_path, gs_path;
  CLI::App* un_cmd = app.add_subcommand("unpsfrag", "merge tagged EPS and psfrag file");
  un_cmd->add_option("basename", un_basename, "output base name")->required();
  un_cmd->add_option("eps", un_eps, "tagged EPS file")->required();
  un_cmd->add_option("tex", un_tex, "psfrag rules file")->required();
  un_cmd->add_option("--formats", formats, "comma list of outputs: eps,pdf");
  un_cmd->add_option("--preamble", un_flags.tex_preamble, "extra LaTeX preamble lines");
  un_cmd->add_option("--graphics-opts", un_flags.include_graphics_options,
                     "options for \\includegraphics, e.g. width=7cm");
  un_cmd->add_option("--dvips-opts", un_flags.dvips_options, "options passed to dvips");
  un_cmd->add_option("--preview", preview, "preview dpi or \"none\"");
  un_cmd->add_option("--bbox-method", bbox_method, "raster[:dpi[:threshold]] or gs");
  un_cmd->add_flag("--dry-run", un_flags.dry_run, "validate and write the driver, run nothing");
  un_cmd->add_option("--latex", latex_path, "latex executable");
  un_cmd->add_option("--dvips", dvips_path, "dvips executable");
  un_cmd->add_option("--gs", gs_path, "ghostscript executable");

  std::string sn_basename, sn_mode;
  CLI::App* sn_cmd = app.add_subcommand("snippet", "print manuscript inclusion boilerplate");
  sn_cmd->add_option("basename", sn_basename, "figure base name")->required();
  sn_cmd->add_option("mode", sn_mode, "psfrag-env | pst-pdf | pdfcontainer")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*export_cmd) {
      if (!rules_file.empty()) export_opts.rules_file = rules_file;
      if (export_opts.manual && !export_opts.rules_file)
        throw Error(ErrorCode::ParseError, "--manual requires --rules");
      ExportOutput out = cmd_export(eps_in, basename, export_opts);
      std::cout << "wrote " << out.tagged_eps.string() << "\n"
                << "wrote " << out.psfrag_tex.string() << "\n"
                << "wrote " << out.manifest.string() << "\n"
                << out.tag_map.entries.size() << " label(s) tagged\n";
      return 0;
    }
    if (*un_cmd) {
      un_flags.output_formats = parse_formats(formats);
      un_flags.preview_device = parse_preview(preview);
      un_flags.bbox_method = parse_bbox_method(bbox_method);
      un_flags.toolchain = {latex_path, dvips_path, gs_path};
      RenderResult result = cmd_unpsfrag(un_basename, un_eps, un_tex, un_flags);
      if (un_flags.dry_run) {
        std::cout << "dry run: driver written to " << result.driver_path.string() << "\n";
        for (const auto& p : result.produced)
          std::cout << "would produce " << p.string() << "\n";
      } else {
        for (const auto& p : result.produced) std::cout << "wrote " << p.string() << "\n";
        if (result.preview_path)
          std::cout << "wrote " << result.preview_path->string() << "\n";
        if (result.measured_bbox) {
          const BBox& b = *result.measured_bbox;
          std::cout << "measured bounding box: " << b.llx << " " << b.lly << " " << b.urx << " "
                    << b.ury << "\n";
        }
      }
      return 0;
    }
    if (*sn_cmd) {
      std::cout << cmd_snippet(sn_basename, sn_mode);
      return 0;
    }
  } catch (const StageFailedError& e) {
    std::cerr << "psforge: " << e.what() << "\n";
    for (const std::string& hint : e.hints()) std::cerr << "hint: " << hint << "\n";
    return exit_code_for(e);
  } catch (const Error& e) {
    std::cerr << "psforge: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "psforge: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace psforge
