#pragma once
// Command-line front end. The commands live in a library so tests can run
// them in-process; tools/klein.cpp is a thin wrapper.
//
// Exit codes: 0 success, 1 input error, 2 property violation.

#include <iosfwd>
#include <string>
#include <vector>

namespace kleinian {

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string sha256_hex(const std::string& bytes);
// Throws Error(IoError) when the file cannot be read.
std::string file_sha256(const std::string& path);

const char* tool_version();

}  // namespace kleinian
