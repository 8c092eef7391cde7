#pragma once

#include <ostream>

namespace everify {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitClientError = 2;

/// Entry point of the `everify` binary: subcommands curate, run, score,
/// analyze and mock-serve.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace everify
