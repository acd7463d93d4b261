#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace wignerscope::cli {

/// Runs one subcommand. args excludes the program name.
/// Returns 0 on success, 1 on invalid input, 2 when a numeric guard trips.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

/// FNV-1a 64-bit digest of a file's bytes, as 16 hex digits.
std::string file_digest(const std::string& path);
std::uint64_t fnv1a64(std::string_view bytes);

/// Path of the sidecar manifest written next to `output`.
std::string manifest_path(const std::string& output);

}  // namespace wignerscope::cli
