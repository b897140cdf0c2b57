#pragma once

namespace vs {

// Entry point for the varsample command-line tool. Exit codes: 0 success,
// 2 usage or input error, 3 numerical failure, 4 certification failure
// under --require-certificate.
int run_cli(int argc, const char* const* argv);

}  // namespace vs
