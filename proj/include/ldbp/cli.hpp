#pragma once

#include <cstdint>
#include <ostream>
#include <string_view>
#include <vector>

namespace ldbp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Entry point for the `ldbp` tool: subcommands gen, sim and sweep.
/// Machine-readable output goes to `out`, diagnostics and summaries to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// "8,16,32" -> {8, 16, 32}. Throws std::invalid_argument.
std::vector<std::uint64_t> parse_value_list(std::string_view text);

} // namespace ldbp
