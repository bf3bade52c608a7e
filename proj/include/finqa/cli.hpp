#pragma once

#include <iosfwd>

namespace finqa {

/// Runs one `finqa <subcommand> ...` invocation. Returns 0 on success, 1 when
/// the work completed but found rejected records or invalid programs, and 2
/// for usage or I/O errors.
int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace finqa
