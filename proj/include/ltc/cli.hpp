#pragma once

#include <string>
#include <vector>

namespace ltc {

// Exit codes: 0 success, 1 usage error, 2 runtime/numerical failure.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace ltc
