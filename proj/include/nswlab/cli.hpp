#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nswlab::cli {

enum ExitCode { exit_pass = 0, exit_check_failed = 1, exit_usage = 2, exit_abort = 3 };

/// Runs one command line (without the program name). Every command writes a
/// manifest next to its outputs listing input and output hashes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

/// Applies NSW_THREADS to the OpenMP runtime when set.
void apply_thread_env();

}  // namespace nswlab::cli
