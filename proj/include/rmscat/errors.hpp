#pragma once

#include <stdexcept>
#include <string>

namespace rmscat {

// I/O failures (unreadable files, write errors) — distinct from validation
// errors so the CLI can map them to exit code 2 instead of 1.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace rmscat
