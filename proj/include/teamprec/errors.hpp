// SPDX-License-Identifier: Apache-2.0
//
// teamprec: team MMSE precoding for cell-free massive MIMO
// Copyright (C) 2026 The teamprec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef TEAMPREC_ERRORS_HPP
#define TEAMPREC_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace teamprec {

enum class ErrorKind {
  SingularMatrix,
  NotHermitian,
  StatsOutOfRange,
  DegenerateDenominator,
  NegativePower,
  DivisionByZero,
  UnsupportedScheme,
  InvalidGeometry,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

/// Numerical or model failure raised by the library. Configuration problems
/// (bad dimensions, unknown tags) use ErrorKind::InvalidArgument or
/// InvalidGeometry; everything else signals a numerical condition.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

  bool is_config_error() const noexcept {
    return kind_ == ErrorKind::InvalidArgument || kind_ == ErrorKind::InvalidGeometry ||
           kind_ == ErrorKind::UnsupportedScheme;
  }

 private:
  ErrorKind kind_;
  std::string detail_;
};

inline void require(bool condition, const std::string& what) {
  if (!condition) throw Error(ErrorKind::InvalidArgument, what);
}

}  // namespace teamprec

#endif  // TEAMPREC_ERRORS_HPP
