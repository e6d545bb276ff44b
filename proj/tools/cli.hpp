#pragma once

namespace ovo::cli {

/// Parses and runs one CLI invocation. Exit codes: 0 success, 1 parse or
/// validation failure, 2 numerical failure.
int run(int argc, const char* const* argv);

} // namespace ovo::cli
