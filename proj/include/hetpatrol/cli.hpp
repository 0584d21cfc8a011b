#pragma once

#include <iosfwd>

namespace hetpatrol::cli {

/// Entry point for `hetpatrol <signalmap|trial|sweep|analyze> ...`.
/// Returns the process exit code; failures print one diagnostic line to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hetpatrol::cli
