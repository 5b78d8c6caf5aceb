#pragma once

#include <atomic>
#include <ostream>
#include <string>
#include <vector>

namespace fpvgl::cli {

// Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
// Errors are printed to err as a single "error: ..." line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Set from a signal handler to end long-running subcommands cleanly.
std::atomic<bool>& interrupt_flag();

}  // namespace fpvgl::cli
