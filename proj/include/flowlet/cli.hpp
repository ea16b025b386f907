#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace flowlet {

// Exit status: 0 clean, 1 type errors (or stuck eval), 2 usage, 3 internal.
int run_cli(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err);

} // namespace flowlet
