#pragma once

#include <iosfwd>

namespace dive::cli {

// Exit status: 0 success, 1 engine or validation error, 2 usage error.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace dive::cli
