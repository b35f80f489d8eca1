#pragma once

#include <iosfwd>

namespace fiberlab::cli {

/// Runs one fiberlab command line. Returns the process exit code: 0 on success,
/// 1 when selftest has failing criteria, 2 on a validation or library error (with
/// {"error": {"code", "message"}} written to `err`).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fiberlab::cli
