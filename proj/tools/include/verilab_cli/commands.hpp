#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "verilab/error.hpp"

namespace verilab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitNumeric = 4;
inline constexpr int kExitOther = 1;

int exit_code_for(ErrorKind kind);

/// Runs one command line (argv[0] excluded) and returns its exit code.
/// Errors are reported on `err` as "verilab: <kind> error: <message>".
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace verilab::cli
