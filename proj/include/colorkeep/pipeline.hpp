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

// End-to-end color-preserving style transfer.
//
//   color_pre   match the style image's colors to the content, then stylize
//   color_post  stylize, then match the result's colors to the content
//   luminance   stylize the luminance only and reattach the content's chroma

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "colorkeep/affine_transfer.hpp"
#include "colorkeep/codec.hpp"
#include "colorkeep/colorstats.hpp"
#include "colorkeep/error.hpp"
#include "colorkeep/image.hpp"
#include "colorkeep/luminance.hpp"
#include "colorkeep/parallel.hpp"
#include "colorkeep/styler.hpp"

namespace colorkeep {

enum class Mode { color_pre, color_post, luminance };

constexpr std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::color_pre: return "color_pre";
    case Mode::color_post: return "color_post";
    case Mode::luminance: return "luminance";
  }
  return "unknown";
}

struct PipelineConfig {
  Mode mode = Mode::color_pre;
  Variant variant = Variant::image_analogies;
  bool lum_match = false;
  StylerSpec styler;
  std::optional<double> eps;
  std::filesystem::path content_path;
  std::filesystem::path style_path;
  std::filesystem::path output_path;
  std::optional<std::filesystem::path> report_path;
  Exec exec;
};

// Thresholds above which a solved map is flagged in the report.
inline constexpr double kCovResidualTolerance = 1e-8;  // relative to |S_t|_F
inline constexpr double kMeanResidualTolerance = 1e-10;
inline constexpr double kLargeMapNorm = 1e3;

struct SolvedMap {
  AffineColorMap map;
  ConstraintResiduals residuals;
  double transport_cost = 0;
  ColorStats source_stats;
  ColorStats matched_stats;  // stats of the mapped image before clamping
};

struct LuminanceReport {
  ScalarStats style;
  ScalarStats content;
  std::optional<ScalarStats> matched_style;  // pre-clamp, set with lum_match
  std::size_t clamped_pixels = 0;
  double clamped_fraction = 0;
};

struct RunReport {
  Mode mode = Mode::color_pre;
  std::optional<Variant> variant;
  bool lum_match = false;
  ColorStats content_stats;
  ColorStats style_stats;
  std::optional<SolvedMap> solved;
  std::optional<LuminanceReport> luminance;
  std::vector<std::pair<std::string, double>> timings_ms;
  std::vector<std::string> warnings;
};

struct PipelineResult {
  ImagePlanarF output;
  RunReport report;
};

namespace detail {

// Times `fn` into the report and tags any Error it throws with `stage`.
template <typename Fn>
auto stage(RunReport& report, const char* name, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  auto record = [&] {
    const std::chrono::duration<double, std::milli> ms = std::chrono::steady_clock::now() - start;
    report.timings_ms.emplace_back(name, ms.count());
  };
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      record();
    } else {
      auto result = fn();
      record();
      return result;
    }
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(name);
  }
}

inline void check_inputs(const ImagePlanarF& content, const ImagePlanarF& style) {
  if (content.pixel_count() == 0 || style.pixel_count() == 0) {
    throw Error(Errc::empty_image, "input image has no pixels");
  }
}

// Solves source -> target, applies it to `img`, records everything.
inline ImagePlanarF color_match(RunReport& report, const ImagePlanarF& img, const ColorStats& source,
                                const ColorStats& target, const PipelineConfig& cfg) {
  SolvedMap solved;
  solved.source_stats = source;
  solved.map = stage(report, "solve_affine_map",
                     [&] { return solve_affine_map(source, target, cfg.variant, cfg.eps); });
  ImagePlanarF mapped = stage(report, "apply_affine_map", [&] {
    return apply_affine_map(img, solved.map, Clamp::off, cfg.exec);
  });
  solved.matched_stats = stage(report, "matched_stats",
                               [&] { return compute_color_stats(mapped, cfg.exec); });
  solved.residuals = verify_constraint(solved.map, source, target);
  solved.transport_cost = transport_cost(solved.map, source);

  const double cov_scale =
      frobenius_norm(add_diagonal(target.cov, solved.map.target_regularization).full());
  if (solved.residuals.cov_residual > kCovResidualTolerance * std::max(cov_scale, 1e-300) ||
      solved.residuals.mean_residual > kMeanResidualTolerance) {
    report.warnings.push_back("affine map residuals above tolerance (mean " +
                              std::to_string(solved.residuals.mean_residual) + ", cov " +
                              std::to_string(solved.residuals.cov_residual) + ")");
  }
  const double a_norm = frobenius_norm(solved.map.a);
  if (a_norm > kLargeMapNorm) {
    report.warnings.push_back("affine map is very large (|A|_F = " + std::to_string(a_norm) +
                              "); the source image is nearly constant");
  }
  report.solved = solved;
  clamp_to_unit(mapped);
  return mapped;
}

inline ImagePlanarF stylize(RunReport& report, const PipelineConfig& cfg, const ImagePlanarF& content,
                            const ImagePlanarF& style) {
  StylerResult r = stage(report, "run_styler", [&] { return run_styler(cfg.styler, content, style); });
  for (auto& w : r.warnings) report.warnings.push_back(std::move(w));
  return std::move(r.image);
}

inline RunReport start_report(const PipelineConfig& cfg, const ImagePlanarF& content,
                              const ImagePlanarF& style) {
  check_inputs(content, style);
  RunReport report;
  report.mode = cfg.mode;
  if (cfg.mode != Mode::luminance) report.variant = cfg.variant;
  report.lum_match = cfg.lum_match;
  report.content_stats = stage(report, "content_stats", [&] { return compute_color_stats(content, cfg.exec); });
  report.style_stats = stage(report, "style_stats", [&] { return compute_color_stats(style, cfg.exec); });
  return report;
}

}  // namespace detail

/// Colors of the style image are matched to the content before stylizing.
inline PipelineResult run_color_pre(const ImagePlanarF& content, const ImagePlanarF& style,
                                    const PipelineConfig& cfg) {
  RunReport report = detail::start_report(cfg, content, style);
  const ImagePlanarF matched_style =
      detail::color_match(report, style, report.style_stats, report.content_stats, cfg);
  ImagePlanarF output = detail::stylize(report, cfg, content, matched_style);
  return {std::move(output), std::move(report)};
}

/// The stylized result is color matched to the content afterwards.
inline PipelineResult run_color_post(const ImagePlanarF& content, const ImagePlanarF& style,
                                     const PipelineConfig& cfg) {
  RunReport report = detail::start_report(cfg, content, style);
  const ImagePlanarF styled = detail::stylize(report, cfg, content, style);
  const ColorStats styled_stats = detail::stage(report, "styled_stats",
                                                [&] { return compute_color_stats(styled, cfg.exec); });
  ImagePlanarF output = detail::color_match(report, styled, styled_stats, report.content_stats, cfg);
  return {std::move(output), std::move(report)};
}

/// Only the luminance is stylized; I and Q come from the content.
inline PipelineResult run_luminance(const ImagePlanarF& content, const ImagePlanarF& style,
                                    const PipelineConfig& cfg) {
  RunReport report = detail::start_report(cfg, content, style);
  using detail::stage;
  const YiqImage content_yiq = stage(report, "rgb_to_yiq", [&] { return rgb_to_yiq(content, cfg.exec); });
  Plane style_l = stage(report, "rgb_to_yiq", [&] { return rgb_to_yiq(style, cfg.exec).y; });

  LuminanceReport lum;
  lum.content = compute_scalar_stats(content_yiq.y, cfg.exec);
  lum.style = compute_scalar_stats(style_l, cfg.exec);
  if (cfg.lum_match) {
    stage(report, "match_luminance", [&] {
      const Plane unclamped = match_luminance(style_l, lum.content, lum.style, Clamp::off);
      lum.matched_style = compute_scalar_stats(unclamped, cfg.exec);
      style_l = match_luminance(style_l, lum.content, lum.style, Clamp::on);
    });
  }

  const ImagePlanarF styled = detail::stylize(
      report, cfg, replicate_gray(content_yiq.y, content.width, content.height),
      replicate_gray(style_l, style.width, style.height));
  const Plane styled_l = stage(report, "rgb_to_yiq", [&] { return rgb_to_yiq(styled, cfg.exec).y; });

  YiqImage merged = content_yiq;
  merged.y = styled_l;
  lum.clamped_pixels = count_out_of_gamut(merged);
  lum.clamped_fraction =
      static_cast<double>(lum.clamped_pixels) / static_cast<double>(content.pixel_count());
  ImagePlanarF output = stage(report, "recombine", [&] { return recombine(styled_l, content_yiq, cfg.exec); });
  report.luminance = lum;
  return {std::move(output), std::move(report)};
}

inline PipelineResult run_mode(const ImagePlanarF& content, const ImagePlanarF& style,
                               const PipelineConfig& cfg) {
  switch (cfg.mode) {
    case Mode::color_pre: return run_color_pre(content, style, cfg);
    case Mode::color_post: return run_color_post(content, style, cfg);
    case Mode::luminance: return run_luminance(content, style, cfg);
  }
  throw Error(Errc::usage, "unknown mode");
}

// ---------------------------------------------------------------------------
// JSON report

inline nlohmann::json to_json(const Vec3& v) { return nlohmann::json::array({v[0], v[1], v[2]}); }

inline nlohmann::json to_json(const Mat3& m) {
  auto out = nlohmann::json::array();
  for (std::size_t r = 0; r < 3; ++r) out.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return out;
}

inline nlohmann::json to_json(const ColorStats& s) {
  return {{"mean", to_json(s.mean)}, {"cov", to_json(s.cov.full())}, {"n", s.n}};
}

inline nlohmann::json to_json(const ScalarStats& s) { return {{"mean", s.mean}, {"std", s.std}}; }

inline nlohmann::json to_json(const ConstraintResiduals& r) {
  return {{"mean_residual", r.mean_residual}, {"cov_residual", r.cov_residual}};
}

inline nlohmann::json to_json(const AffineColorMap& map, const ConstraintResiduals& residuals,
                              double cost) {
  return {{"variant", std::string(to_string(map.variant))},
          {"A", to_json(map.a)},
          {"b", to_json(map.b)},
          {"source_regularization", map.source_regularization},
          {"target_regularization", map.target_regularization},
          {"residuals", to_json(residuals)},
          {"transport_cost", cost}};
}

inline nlohmann::json to_json(const RunReport& r) {
  nlohmann::json j;
  j["mode"] = std::string(to_string(r.mode));
  j["variant"] = r.variant ? nlohmann::json(std::string(to_string(*r.variant))) : nlohmann::json(nullptr);
  j["lum_match"] = r.lum_match;
  j["content_stats"] = to_json(r.content_stats);
  j["style_stats"] = to_json(r.style_stats);
  if (r.solved) {
    j["map"] = to_json(r.solved->map, r.solved->residuals, r.solved->transport_cost);
    j["residuals"] = to_json(r.solved->residuals);
    j["transport_cost"] = r.solved->transport_cost;
    j["map_source_stats"] = to_json(r.solved->source_stats);
    j["matched_stats"] = to_json(r.solved->matched_stats);
  }
  if (r.luminance) {
    const auto& l = *r.luminance;
    nlohmann::json lum{{"style", to_json(l.style)},
                       {"content", to_json(l.content)},
                       {"clamped_pixels", l.clamped_pixels},
                       {"clamped_fraction", l.clamped_fraction}};
    lum["matched_style"] = l.matched_style ? to_json(*l.matched_style) : nlohmann::json(nullptr);
    j["luminance"] = lum;
  }
  nlohmann::json timings = nlohmann::json::array();
  for (const auto& [name, ms] : r.timings_ms) timings.push_back({{"stage", name}, {"ms", ms}});
  j["timings_ms"] = timings;
  j["warnings"] = r.warnings;
  return j;
}

// ---------------------------------------------------------------------------
// File-level entry point

/// Loads the inputs named in `cfg`, runs its mode, writes the output image and
/// (if requested) the JSON report.
inline PipelineResult run_pipeline(const PipelineConfig& cfg) {
  if (!format_from_extension(cfg.output_path)) {
    throw Error(Errc::usage, cfg.output_path.string() + ": output must end in .png or .ppm");
  }
  ImagePlanarF content, style;
  try {
    content = to_float(read_image(cfg.content_path));
    style = to_float(read_image(cfg.style_path));
  } catch (const Error& e) {
    throw e.with_stage("read_input");
  }
  PipelineResult result = run_mode(content, style, cfg);
  detail::stage(result.report, "write_output",
                [&] { write_image(cfg.output_path, to_u8(result.output)); });
  if (cfg.report_path) {
    const std::string text = to_json(result.report).dump(2) + "\n";
    write_file(*cfg.report_path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  }
  return result;
}

}  // namespace colorkeep
