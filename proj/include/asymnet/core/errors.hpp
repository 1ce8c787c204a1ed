#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace asymnet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input that violates a codec precondition (wrong length, missing start bit, ...).
class MalformedInput : public Error {
 public:
  using Error::Error;
};

// Manchester pair that is (0,0) or (1,1).
class CodingViolation : public Error {
 public:
  CodingViolation(std::size_t pair_index)
      : Error("manchester coding violation at pair " + std::to_string(pair_index)), position(pair_index) {}
  std::size_t position;
};

class NoLock : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class BootstrapError : public Error {
 public:
  using Error::Error;
};

}  // namespace asymnet
