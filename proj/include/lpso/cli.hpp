#pragma once

#include <iosfwd>

namespace lpso {

enum ExitCode : int { kExitPass = 0, kExitUsage = 2, kExitCertificate = 3, kExitIo = 4 };

// Entry point of the lpso tool: spectrum, construct, verify.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lpso
