#include <vector>

#include "searchlab/cli.h"

int main(int argc, char** argv) {
  return searchlab::cli_main(std::vector<std::string>(argv + 1, argv + argc));
}
