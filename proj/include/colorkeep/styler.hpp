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

// The style-synthesis stage is not part of this library. It is reached
// through a StylerSpec: either an external command that reads two PNG files
// and writes a third, or one of two deterministic stand-ins used for testing.

#pragma once

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <vector>

#include "colorkeep/codec.hpp"
#include "colorkeep/error.hpp"
#include "colorkeep/image.hpp"

extern char** environ;

namespace colorkeep {

enum class StylerKind { external, identity, mock_blend };

struct StylerSpec {
  StylerKind kind = StylerKind::identity;
  std::string command_template;  // external: must contain {content}, {style}, {output} once each
  double timeout_seconds = 3600.0;
  double blend_alpha = 0.5;  // mock_blend
  std::filesystem::path scratch_root;  // defaults to the system temp directory
};

struct StylerResult {
  ImagePlanarF image;
  std::vector<std::string> warnings;
};

inline constexpr std::string_view kContentPlaceholder = "{content}";
inline constexpr std::string_view kStylePlaceholder = "{style}";
inline constexpr std::string_view kOutputPlaceholder = "{output}";

namespace detail {

inline std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t count = 0;
  for (std::size_t at = text.find(needle); at != std::string_view::npos;
       at = text.find(needle, at + needle.size())) {
    ++count;
  }
  return count;
}

inline std::string replace_once(std::string text, std::string_view needle, const std::string& with) {
  const std::size_t at = text.find(needle);
  text.replace(at, needle.size(), with);
  return text;
}

/// mkdtemp directory, removed with its contents on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::filesystem::path& root) {
    const auto base = root.empty() ? std::filesystem::temp_directory_path() : root;
    std::string pattern = (base / "colorkeep-XXXXXX").string();
    if (::mkdtemp(pattern.data()) == nullptr) {
      throw Error(Errc::io, "cannot create scratch directory under " + base.string() + ": " +
                                std::strerror(errno));
    }
    path_ = pattern;
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string tail_of_file(const std::filesystem::path& path, std::size_t max_bytes = 4096) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return {};
  Bytes data = read_file(path);
  const std::size_t start = data.size() > max_bytes ? data.size() - max_bytes : 0;
  return std::string(data.begin() + static_cast<std::ptrdiff_t>(start), data.end());
}

// Runs `/bin/sh -c command` in its own process group with stdout and stderr
// sent to `log`. Returns the exit status; kills the group on timeout.
inline int run_shell(const std::string& command, const std::filesystem::path& log,
                     double timeout_seconds) {
  posix_spawn_file_actions_t actions;
  posix_spawnattr_t attr;
  posix_spawn_file_actions_init(&actions);
  posix_spawnattr_init(&attr);
  const std::string log_path = log.string();
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, log_path.c_str(),
                                   O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_adddup2(&actions, STDOUT_FILENO, STDERR_FILENO);
  posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  posix_spawnattr_setpgroup(&attr, 0);

  std::string sh = "/bin/sh", dash_c = "-c", cmd = command;
  char* argv[] = {sh.data(), dash_c.data(), cmd.data(), nullptr};
  pid_t pid = 0;
  const int rc = posix_spawn(&pid, "/bin/sh", &actions, &attr, argv, environ);
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  if (rc != 0) throw Error(Errc::styler_failed, std::string("cannot spawn styler: ") + std::strerror(rc));

  using clock = std::chrono::steady_clock;
  const auto deadline = clock::now() + std::chrono::duration_cast<clock::duration>(
                                           std::chrono::duration<double>(timeout_seconds));
  int status = 0;
  for (;;) {
    const pid_t done = ::waitpid(pid, &status, WNOHANG);
    if (done == pid) break;
    if (done < 0 && errno != EINTR) {
      throw Error(Errc::styler_failed, std::string("waitpid failed: ") + std::strerror(errno));
    }
    if (clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      throw Error(Errc::timeout, "styler exceeded its timeout of " +
                                     std::to_string(timeout_seconds) + " s");
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  return status;
}

inline StylerResult run_external(const StylerSpec& spec, const ImagePlanarF& content,
                                 const ImagePlanarF& style) {
  ScratchDir scratch(spec.scratch_root);
  const auto content_path = scratch.path() / "content.png";
  const auto style_path = scratch.path() / "style.png";
  const auto output_path = scratch.path() / "output.png";
  const auto log_path = scratch.path() / "styler.log";
  write_image(content_path, to_u8(content));
  write_image(style_path, to_u8(style));

  std::string command = spec.command_template;
  command = replace_once(command, kContentPlaceholder, content_path.string());
  command = replace_once(command, kStylePlaceholder, style_path.string());
  command = replace_once(command, kOutputPlaceholder, output_path.string());

  const int status = run_shell(command, log_path, spec.timeout_seconds);
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    const std::string how = WIFEXITED(status)
                                ? "exited with status " + std::to_string(WEXITSTATUS(status))
                                : "was killed by signal " + std::to_string(WTERMSIG(status));
    throw Error(Errc::styler_failed, "styler " + how + "; output:\n" + tail_of_file(log_path));
  }

  ImagePlanarF result;
  try {
    result = to_float(read_image(output_path));
  } catch (const Error& e) {
    throw Error(Errc::format, std::string("styler output unreadable: ") + e.what());
  }
  StylerResult out;
  if (!result.same_size(content)) {
    out.warnings.push_back("styler output is " + std::to_string(result.width) + "x" +
                           std::to_string(result.height) + ", resampled to " +
                           std::to_string(content.width) + "x" + std::to_string(content.height));
    result = resample_nearest(result, content.width, content.height);
  }
  out.image = std::move(result);
  return out;
}

}  // namespace detail

/// Throws Errc::usage when the spec cannot be run.
inline void validate(const StylerSpec& spec) {
  switch (spec.kind) {
    case StylerKind::external:
      for (auto ph : {kContentPlaceholder, kStylePlaceholder, kOutputPlaceholder}) {
        if (detail::count_occurrences(spec.command_template, ph) != 1) {
          throw Error(Errc::usage, "styler command must contain " + std::string(ph) + " exactly once");
        }
      }
      if (!(spec.timeout_seconds > 0)) throw Error(Errc::usage, "styler timeout must be positive");
      break;
    case StylerKind::mock_blend:
      if (!(spec.blend_alpha >= 0.0 && spec.blend_alpha <= 1.0)) {
        throw Error(Errc::usage, "blend alpha must be in [0, 1]");
      }
      break;
    case StylerKind::identity:
      break;
  }
}

/// Produces a styled image with the dimensions of `content`.
inline StylerResult run_styler(const StylerSpec& spec, const ImagePlanarF& content,
                               const ImagePlanarF& style) {
  validate(spec);
  switch (spec.kind) {
    case StylerKind::identity:
      return {content, {}};
    case StylerKind::mock_blend: {
      const ImagePlanarF resampled = resample_nearest(style, content.width, content.height);
      const double alpha = spec.blend_alpha;
      ImagePlanarF out(content.width, content.height);
      for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t k = 0; k < content.pixel_count(); ++k) {
          out.planes[c][k] = alpha * resampled.planes[c][k] + (1.0 - alpha) * content.planes[c][k];
        }
      }
      return {std::move(out), {}};
    }
    case StylerKind::external:
      return detail::run_external(spec, content, style);
  }
  throw Error(Errc::usage, "unknown styler kind");
}

}  // namespace colorkeep
