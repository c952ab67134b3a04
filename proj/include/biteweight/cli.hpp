#pragma once

namespace biteweight::cli {

// Entry point behind the `biteweight` binary. Subcommands: synth, validate,
// features, train, loso, report. Returns 0 on success, 1 on validation
// errors, 2 on usage errors.
int run(int argc, const char* const* argv);

}  // namespace biteweight::cli
