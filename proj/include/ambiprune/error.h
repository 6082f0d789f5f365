/* Copyright 2026 The ambiprune Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef AMBIPRUNE_ERROR_H_
#define AMBIPRUNE_ERROR_H_

#include <stdexcept>
#include <string>

namespace ambiprune {

// Every failure raised by the library derives from Error so callers can map
// it onto an exit code or HTTP status without catching foreign types.
enum class ErrorKind {
  kParse,       // malformed input text
  kValidation,  // well-formed input that violates a data invariant
  kDomain,      // argument outside an operation's domain
  kIo,          // file system or network failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t line, const std::string& detail)
      : Error(ErrorKind::kParse,
              file + ":" + std::to_string(line) + ": " + detail),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error(ErrorKind::kValidation, message) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& message)
      : Error(ErrorKind::kDomain, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message)
      : Error(ErrorKind::kIo, message) {}
};

// 0 success, 1 validation/domain, 2 I/O.
inline int exit_code_for(const Error& e) {
  return e.kind() == ErrorKind::kIo ? 2 : 1;
}

}  // namespace ambiprune

#endif  // AMBIPRUNE_ERROR_H_
