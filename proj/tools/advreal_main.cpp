#include <iostream>
#include <string>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "advreal/harness/cli.hpp"

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // Large per-layer buffers otherwise go through mmap/munmap on every call.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  std::vector<std::string> args(argv + 1, argv + argc);
  return advreal::harness::run_cli(args, std::cout, std::cerr);
}
