#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace hlx::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDomain = 3;

struct CommandOptions {
  std::optional<double> eps;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  bool infimal = false;
};

int cmd_iterate(const std::filesystem::path& config, const CommandOptions& opts,
                std::ostream& out, std::ostream& err);
int cmd_verify(const std::filesystem::path& config, const CommandOptions& opts,
               std::ostream& out, std::ostream& err);
int cmd_guarantee(const std::filesystem::path& config, const CommandOptions& opts,
                  std::ostream& out, std::ostream& err);

/// Writes `contents` to a temporary sibling and renames it over `path`.
void write_atomically(const std::filesystem::path& path, const std::string& contents);

}  // namespace hlx::app
