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

#include <stdexcept>
#include <string>
#include <string_view>

namespace colorkeep {

enum class Errc {
  format,
  unsupported_depth,
  truncated,
  dimension,
  numeric,
  not_positive_definite,
  not_psd,
  singular,
  empty_image,
  degenerate_stats,
  degenerate_luminance,
  styler_failed,
  timeout,
  io,
  usage,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::format: return "format";
    case Errc::unsupported_depth: return "unsupported-depth";
    case Errc::truncated: return "truncated";
    case Errc::dimension: return "dimension";
    case Errc::numeric: return "numeric";
    case Errc::not_positive_definite: return "not-positive-definite";
    case Errc::not_psd: return "not-psd";
    case Errc::singular: return "singular";
    case Errc::empty_image: return "empty-image";
    case Errc::degenerate_stats: return "degenerate-stats";
    case Errc::degenerate_luminance: return "degenerate-luminance";
    case Errc::styler_failed: return "styler-failed";
    case Errc::timeout: return "timeout";
    case Errc::io: return "io";
    case Errc::usage: return "usage";
  }
  return "unknown";
}

/// Every failure in the library is reported as an Error. `stage()` is filled
/// in by the pipeline with the name of the step that raised it.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what, std::string stage = {})
      : std::runtime_error(what), code_(code), stage_(std::move(stage)) {}

  Errc code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }

  Error with_stage(std::string stage) const {
    return Error(code_, what(), std::move(stage));
  }

 private:
  Errc code_;
  std::string stage_;
};

}  // namespace colorkeep
