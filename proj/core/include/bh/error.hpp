/*
 * Copyright 2026 The bhest Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef BH_ERROR_HPP_
#define BH_ERROR_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bh {

enum class ErrorKind {
  kConfig,      // bad user configuration or CLI flag
  kParameter,   // argument outside its documented domain
  kFormat,      // malformed file contents
  kValidation,  // well-formed file with invalid values
  kGeometry,    // misaligned grids, invalid polygons
  kDegenerate,  // collinear hulls and similar
  kLookup,      // unknown band / column / feature
  kRecipe,      // unresolvable feature recipe
  kShape,       // row width mismatch
  kData,        // empty or otherwise unusable data
  kIo,          // filesystem failures
  kInvariant,   // internal invariant violated
};

const char* to_string(ErrorKind kind);

// Process exit code for a CLI failure of the given kind: 2 for configuration
// problems, 3 for data problems, 4 for internal invariant violations.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised by the BHGR reader; carries the byte offset at which decoding failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& message, std::uint64_t offset)
      : Error(ErrorKind::kFormat,
              message + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

}  // namespace bh

#endif  // BH_ERROR_HPP_
