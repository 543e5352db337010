#pragma once

// Runs a shell command and captures stdout plus the exit status.

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <sstream>
#include <string>

namespace sqz::testing {

struct CommandResult {
  std::string out;
  int exit_code = -1;
};

inline CommandResult run_command(const std::string& cmd) {
  CommandResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) {
    return r;
  }
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) {
    r.out.append(buf.data(), n);
  }
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

// Output with the run timestamp removed; everything else must repeat exactly.
inline std::string without_timestamp(const std::string& text) {
  std::istringstream in(text);
  std::string line, kept;
  while (std::getline(in, line)) {
    if (line.rfind("# timestamp:", 0) != 0) {
      kept += line + '\n';
    }
  }
  return kept;
}

}  // namespace sqz::testing
