// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace moop::cli {

/// Parses `args` (without the program name) and runs the subcommand.
/// Returns the process exit status: 0 on success, 1 on a runtime failure,
/// 2 on a usage error. Diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

} // namespace moop::cli
