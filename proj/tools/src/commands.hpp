#pragma once

#include <iosfwd>

#include "manifest.hpp"

namespace paretotab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitPartial = 2;
inline constexpr int kExitUsage = 64;

std::string_view tool_version();

// Runs one command. Library errors are reported on `err` and mapped to exit
// codes; nothing is thrown.
int run_command(const RunManifest& manifest, std::ostream& out, std::ostream& err);

// Parses argv (including the program name) and runs the selected command.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace paretotab::cli
