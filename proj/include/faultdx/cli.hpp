#pragma once

#include <iosfwd>

namespace faultdx::harness {

/// Full command-line front end, exposed as a function so tests can drive
/// it in-process. Exit codes: 0 success, 1 usage error, 2 data/format
/// error, 3 numeric failure.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace faultdx::harness
