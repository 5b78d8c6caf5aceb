#include <csignal>
#include <iostream>

#include "fpvgl/cli/cli.hpp"

namespace {

void on_signal(int) { fpvgl::cli::interrupt_flag() = true; }

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::signal(SIGPIPE, SIG_IGN);
  return fpvgl::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
