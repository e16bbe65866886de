#pragma once

#include <map>
#include <string>
#include <vector>

#include "foi/pipeline.hpp"

namespace foi::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Flat "key = value" file; keys mirror the long flag names without dashes.
// `sub` may repeat. Blank lines and lines starting with '#' are ignored.
using ConfigEntries = std::multimap<std::string, std::string>;

ConfigEntries read_config(const std::string& path);
ConfigEntries parse_config(const std::string& text);

// Applies entries on top of `request`. Throws foi::Error(InvalidArgument) on
// unknown keys or malformed values.
void apply_config(const ConfigEntries& entries, EditRequest& request);

int cli_main(int argc, const char* const* argv);

}  // namespace foi::cli
