#include <iostream>

#include "mpiwasm/cli.hpp"

int main(int argc, char** argv) {
  return mpiwasm::run_bench_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
