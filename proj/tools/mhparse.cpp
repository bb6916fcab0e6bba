#include <cstdio>

int main() {
  std::puts("mhparse: subcommands not wired up yet");
  return 1;
}
