#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ensdet/error.hpp"

namespace ensdet::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitIo = 1,
  kExitUsage = 2,
  kExitValidation = 3,
  kExitMismatch = 4,
};

int exit_code_for(ErrorKind kind) noexcept;

// Runs `ensdet <args...>`; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// 64-bit FNV-1a of a file's bytes, as 16 hex digits.
std::string file_digest(const std::string& path);

}  // namespace ensdet::cli
