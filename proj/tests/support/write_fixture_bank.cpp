// Writes the synthetic test bank to the path given on the command line.
#include <cstdio>

#include "fixture_bank.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: write_fixture_bank OUT.syx\n");
    return 1;
  }
  fmtt::testing::write_fixture_bank(argv[1]);
  return 0;
}
