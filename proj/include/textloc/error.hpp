#pragma once

#include <stdexcept>
#include <string>

namespace textloc {

/// Base of every exception the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on numeric arguments or shapes was violated.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Input bytes could not be interpreted (bad header, inconsistent sizes, empty source).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// The filesystem refused a read or write.
class IoError : public Error {
 public:
  explicit IoError(const std::string& path, const std::string& what)
      : Error(what + ": " + path), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Invalid or unknown configuration key/value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Otsu on an image with fewer than two grey levels. Callers treat the frame as textless.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

}  // namespace textloc
