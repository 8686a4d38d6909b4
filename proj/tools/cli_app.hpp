#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace gcdlab::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kViolation = 1;
inline constexpr int kInvalidInput = 2;

// args excludes the program name. Reports go to out, diagnostics to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Test seam: called with the command name just before it runs. A
// ConsistencyFailure thrown here takes the same exit path as one raised by a
// check. Pass an empty function to clear.
void set_pre_command_hook(std::function<void(const std::string&)> hook);

// CSV reports: header "path,value", one row per leaf.
std::vector<std::pair<std::string, std::string>> parse_csv_report(const std::string& text);
std::string write_csv_report(const std::vector<std::pair<std::string, std::string>>& rows);

}  // namespace gcdlab::cli
