/*
 * Copyright 2026 The colorkeep Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "colorkeep/pipeline.hpp"

namespace colorkeep {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitProcessing = 2;

namespace detail {

inline StylerSpec parse_styler(const std::string& text) {
  StylerSpec spec;
  if (text == "identity") {
    spec.kind = StylerKind::identity;
    return spec;
  }
  const std::string prefix = "blend:";
  if (text.rfind(prefix, 0) == 0) {
    spec.kind = StylerKind::mock_blend;
    const std::string value = text.substr(prefix.size());
    std::size_t used = 0;
    try {
      spec.blend_alpha = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) throw Error(Errc::usage, "--styler: bad blend alpha '" + value + "'");
    validate(spec);
    return spec;
  }
  throw Error(Errc::usage, "--styler must be 'identity' or 'blend:ALPHA'");
}

// out.png -> out.color-pre.png
inline std::filesystem::path tagged_path(const std::filesystem::path& p, const std::string& tag) {
  std::filesystem::path out = p;
  out.replace_filename(p.stem().string() + "." + tag + p.extension().string());
  return out;
}

inline void print_warnings(const RunReport& report, std::ostream& err) {
  for (const auto& w : report.warnings) err << "warning: " << w << "\n";
}

}  // namespace detail

/// Command-line entry point. Returns 0 on success, 1 on usage errors and 2
/// when processing fails.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"Color-preserving style transfer: match the colors of a style image to a\n"
               "content image, or stylize luminance only, around an external styler.",
               "colorkeep"};
  app.set_help_flag("-h,--help", "Print this help message and exit");

  std::string content, style, output, report, mode_name = "color-pre", variant_name = "ia";
  std::string styler_cmd, styler_name = "identity";
  double eps = 0, timeout = 3600.0;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  bool lum_match = false, compare = false;

  app.add_option("--content", content, "Content image (PNG or P6 PPM)")->required();
  app.add_option("--style", style, "Style image (PNG or P6 PPM)")->required();
  app.add_option("--out", output, "Output image (.png or .ppm)")->required();
  app.add_option("--mode", mode_name, "Pipeline mode")
      ->check(CLI::IsMember({"color-pre", "color-post", "luminance"}))
      ->capture_default_str();
  auto* variant_opt = app.add_option("--variant", variant_name, "Affine solver for color modes")
                          ->check(CLI::IsMember({"cholesky", "ia", "mkl"}))
                          ->capture_default_str();
  app.add_flag("--lum-match", lum_match,
               "Match style luminance mean/std to the content (luminance mode)");
  auto* cmd_opt = app.add_option("--styler-cmd", styler_cmd,
                                 "External styler command with {content}, {style}, {output}");
  auto* styler_opt = app.add_option("--styler", styler_name, "Built-in styler: identity | blend:ALPHA")
                         ->capture_default_str();
  cmd_opt->excludes(styler_opt);
  styler_opt->excludes(cmd_opt);
  auto* eps_opt = app.add_option("--eps", eps, "Covariance regularization added to the diagonal")
                      ->check(CLI::NonNegativeNumber);
  auto* report_opt = app.add_option("--report", report, "Write a JSON run report");
  app.add_option("--styler-timeout", timeout, "External styler timeout in seconds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--threads", threads, "Worker threads for per-pixel kernels")
      ->check(CLI::Range(1u, 1024u));
  app.add_flag("--compare", compare, "Run color-pre and color-post and write both outputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  PipelineConfig cfg;
  try {
    static const std::map<std::string, Mode> kModes{
        {"color-pre", Mode::color_pre}, {"color-post", Mode::color_post}, {"luminance", Mode::luminance}};
    static const std::map<std::string, Variant> kVariants{
        {"cholesky", Variant::cholesky}, {"ia", Variant::image_analogies}, {"mkl", Variant::mkl}};
    cfg.mode = kModes.at(mode_name);
    cfg.variant = kVariants.at(variant_name);
    if (cfg.mode == Mode::luminance && variant_opt->count() > 0) {
      throw Error(Errc::usage, "--variant only applies to the color modes");
    }
    if (cfg.mode != Mode::luminance && lum_match) {
      throw Error(Errc::usage, "--lum-match only applies to --mode luminance");
    }
    if (compare && cfg.mode == Mode::luminance) {
      throw Error(Errc::usage, "--compare runs the two color modes; drop --mode luminance");
    }
    cfg.lum_match = lum_match;
    if (cmd_opt->count() > 0) {
      cfg.styler.kind = StylerKind::external;
      cfg.styler.command_template = styler_cmd;
    } else {
      cfg.styler = detail::parse_styler(styler_name);
    }
    cfg.styler.timeout_seconds = timeout;
    validate(cfg.styler);
    if (eps_opt->count() > 0) cfg.eps = eps;
    cfg.content_path = content;
    cfg.style_path = style;
    cfg.output_path = output;
    if (report_opt->count() > 0) cfg.report_path = report;
    cfg.exec.threads = threads;
    if (!format_from_extension(cfg.output_path)) {
      throw Error(Errc::usage, "--out must end in .png or .ppm");
    }
  } catch (const Error& e) {
    err << "usage error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  std::vector<std::pair<std::string, PipelineConfig>> runs;
  if (compare) {
    for (auto [tag, m] : {std::pair{"color-pre", Mode::color_pre}, std::pair{"color-post", Mode::color_post}}) {
      PipelineConfig c = cfg;
      c.mode = m;
      c.output_path = detail::tagged_path(cfg.output_path, tag);
      if (cfg.report_path) c.report_path = detail::tagged_path(*cfg.report_path, tag);
      runs.emplace_back(tag, std::move(c));
    }
  } else {
    runs.emplace_back(std::string(to_string(cfg.mode)), cfg);
  }

  for (const auto& [tag, c] : runs) {
    try {
      const PipelineResult result = run_pipeline(c);
      detail::print_warnings(result.report, err);
      out << "wrote " << c.output_path.string() << "\n";
    } catch (const Error& e) {
      err << "error";
      if (!e.stage().empty()) err << " in " << e.stage();
      err << " [" << to_string(e.code()) << "]: " << e.what() << "\n";
      return e.code() == Errc::usage ? kExitUsage : kExitProcessing;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kExitProcessing;
    }
  }
  return kExitOk;
}

}  // namespace colorkeep
