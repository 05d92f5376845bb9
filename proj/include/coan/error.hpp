#pragma once

#include <stdexcept>
#include <string>

namespace coan {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violated by a caller-supplied value.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Input file does not carry the columns or structure a reader requires.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Job/host/telemetry data cannot be joined (dangling ids, overlapping jobs).
class FusionError : public Error {
 public:
  using Error::Error;
};

// Checkpoint ledger is unreadable or disagrees with the files on disk.
class ResumeRefused : public Error {
 public:
  using Error::Error;
};

}  // namespace coan
