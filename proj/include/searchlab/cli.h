#ifndef SEARCHLAB_CLI_H
#define SEARCHLAB_CLI_H

#include <string>
#include <vector>

namespace searchlab {

// Entry point behind main(), callable in-process by tests. args excludes the
// program name. Exit codes: 0 success; 1 runtime failure (aborted runs,
// integrity or estimation errors); 2 usage or configuration errors.
int cli_main(std::vector<std::string> args);

}  // namespace searchlab

#endif  // SEARCHLAB_CLI_H
