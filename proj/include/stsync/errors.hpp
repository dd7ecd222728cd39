#pragma once

#include <stdexcept>
#include <string>

namespace stsync {

// Offline parameter design failed (Riccati, gain, bound certification, ...).
class SynthesisError : public std::runtime_error {
 public:
  explicit SynthesisError(const std::string& what) : std::runtime_error(what) {}
};

// A runtime monitor detected a violated guarantee during a strict run.
class MonitorViolation : public std::runtime_error {
 public:
  explicit MonitorViolation(const std::string& what) : std::runtime_error(what) {}
};

// Scenario / certificate / CSV parsing or file-system failure.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace stsync
