#pragma once

#include <iosfwd>

namespace unfold::cli {

// Exit codes. Stable: scripts and tests depend on them.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;   // any other library error
inline constexpr int kExitInput = 2;     // unparsable file, bad flag, unknown demo kind
inline constexpr int kExitGrid = 3;      // grid or shape mismatch between inputs
inline constexpr int kExitZeroResponse = 4;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace unfold::cli
