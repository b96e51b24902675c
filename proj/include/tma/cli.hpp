// Command-line driver. tools/tma.cpp is a thin main() around run_cli.
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace tma {

/// Exit codes of the prove command; other commands use 0 and kError.
inline constexpr int kExitProved = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitError = 2;

/// `args` excludes the program name. Environment: TMA_LANG, TMA_LANG_DIR, TMA_ADDR, TMA_CONFIG_DIR.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Where `lang set` stores the preferred language.
std::string preference_file();

}  // namespace tma
