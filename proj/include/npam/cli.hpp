#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace npam {

// Exit codes: 0 success, 1 usage or validation error, 2 I/O or runtime error.
// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace npam
