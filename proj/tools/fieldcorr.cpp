#include <string>
#include <vector>

#include "fieldcorr/cli/commands.hpp"

int main(int argc, char** argv) {
  return fieldcorr::cli::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
