/* Copyright 2026 The attncomp Authors. All Rights Reserved.

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

#ifndef ATTNCOMP_ERROR_H_
#define ATTNCOMP_ERROR_H_

#include <stdexcept>
#include <string>

namespace attncomp {

enum class ErrorCode {
  kInvalidArgument,
  kDataLoss,
  kNumerical,
  kNotConverged,
  kIo,
  kGenerator,
};

// Every failure surfaced by the library is an attncomp::Error. The code lets
// callers (the CLI in particular) map failures onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline Error InvalidArgument(const std::string& message) {
  return Error(ErrorCode::kInvalidArgument, message);
}
inline Error DataLoss(const std::string& message) {
  return Error(ErrorCode::kDataLoss, message);
}
inline Error Numerical(const std::string& message) {
  return Error(ErrorCode::kNumerical, message);
}

}  // namespace attncomp

#endif  // ATTNCOMP_ERROR_H_
