#pragma once

#include "repsim/error.hpp"

#include <iosfwd>

namespace repsim {

/// Process exit status for an error category: config 2, data and I/O 3,
/// numerical degeneracy 4.
int exit_code(ErrorCategory category) noexcept;

/// The `repsim` command line. Results and the dry-run plan go to `out`,
/// progress and diagnostics to `err`. Returns the process exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace repsim
