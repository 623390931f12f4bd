#ifndef KBAD_CLI_HPP
#define KBAD_CLI_HPP

#include <iosfwd>

namespace kbad {

/// Entry point of the `kbad` tool. Returns 0 on success, 1 on runtime
/// failure and 2 on usage errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kbad

#endif  // KBAD_CLI_HPP
