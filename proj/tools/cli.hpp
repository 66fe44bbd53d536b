#pragma once

#include <iosfwd>
#include <string_view>

#include "mbp/penalty.hpp"

namespace mbp::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitStrategy = 3;
inline constexpr int kExitCapability = 4;
inline constexpr int kExitData = 5;

// maxcut | est | mult:<v> | gbr:<model dir> | fixed:<v>
LambdaStrategy parse_lambda_strategy(std::string_view text);

// Runs one command line; never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mbp::cli
