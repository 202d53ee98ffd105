// SPDX-License-Identifier: Apache-2.0
#ifndef CLAB_CLI_CLI_HPP
#define CLAB_CLI_CLI_HPP

#include <filesystem>

namespace clab::cli {

/// Parses argv and dispatches to the subcommand. Returns the process exit
/// status: 0 on success, 2 on configuration or usage errors (message names
/// the offending field), 1 on runtime failures.
int run(int argc, const char* const* argv);

/// `report` subcommand body: regenerates tables/ and charts/ from
/// report.json inside the directory.
void emit_report(const std::filesystem::path& report_dir);

} // namespace clab::cli

#endif // CLAB_CLI_CLI_HPP
