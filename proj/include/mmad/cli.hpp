#pragma once

// Command-line entry points: evaluate, baseline, meta-eval, span-eval,
// report and replay. Exit codes: 0 success, 1 run or data failure, 2 usage.

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace mmad::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

int run(int argc, char** argv);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Flat key=value text; '#' starts a comment, keys may carry a leading
/// "--", and '_' in keys reads as '-'. Throws InvalidInput on a malformed
/// line.
std::map<std::string, std::string> parse_config_text(const std::string& text);

}  // namespace mmad::cli
