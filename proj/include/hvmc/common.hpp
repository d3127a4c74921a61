// Copyright 2026 The Handover VMC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HVMC_COMMON_HPP_
#define HVMC_COMMON_HPP_

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace hvmc {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

enum class ErrorCode {
  kParse,
  kInvalidArgument,
  kNotFound,
  kNonFinite,
  kDiverged,
  kSystem,
};

// Library-wide exception. `where` names the component, key or tick that
// produced the failure so callers can report it without string parsing.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string where = {})
      : std::runtime_error(where.empty() ? message : where + ": " + message),
        code_(code),
        where_(std::move(where)) {}

  ErrorCode code() const { return code_; }
  const std::string& where() const { return where_; }

 private:
  ErrorCode code_;
  std::string where_;
};

inline bool all_finite(const Vec3& v) { return v.allFinite(); }

inline void require_finite(const Vec3& v, std::string_view what) {
  if (!v.allFinite()) {
    throw Error(ErrorCode::kNonFinite, "non-finite input", std::string(what));
  }
}

inline void require_finite(double x, std::string_view what) {
  if (!std::isfinite(x)) {
    throw Error(ErrorCode::kNonFinite, "non-finite input", std::string(what));
  }
}

}  // namespace hvmc

#endif  // HVMC_COMMON_HPP_
