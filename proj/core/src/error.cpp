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

#include "bh/error.hpp"

namespace bh {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kParameter: return "parameter error";
    case ErrorKind::kFormat: return "format error";
    case ErrorKind::kValidation: return "validation error";
    case ErrorKind::kGeometry: return "geometry error";
    case ErrorKind::kDegenerate: return "degeneracy error";
    case ErrorKind::kLookup: return "lookup error";
    case ErrorKind::kRecipe: return "recipe error";
    case ErrorKind::kShape: return "shape error";
    case ErrorKind::kData: return "data error";
    case ErrorKind::kIo: return "io error";
    case ErrorKind::kInvariant: return "invariant violation";
  }
  return "error";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kParameter:
      return 2;
    case ErrorKind::kInvariant:
      return 4;
    default:
      return 3;
  }
}

}  // namespace bh
