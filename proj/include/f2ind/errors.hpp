/*
 * Copyright (c) 2026, The f2ind Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace f2ind {

// Numeric values are part of the C ABI (see f2ind.h); do not renumber.
enum class ErrorCode : int {
  kOk = 0,
  kConfig = 1,
  kIo = 2,
  kFormat = 3,
  kTruncated = 4,
  kCorrupt = 5,
  kShape = 6,
  kNumeric = 7,
  kCache = 8,
  kIndex = 9,
  kSchedule = 10,
  kEmpty = 11,
  kUndefinedMetric = 12,
  kInvalidArgument = 13,
  kInternal = 14,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define F2IND_DEFINE_ERROR(Name, Code)                                \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(Code, what) {}     \
  };

F2IND_DEFINE_ERROR(ConfigError, ErrorCode::kConfig)
F2IND_DEFINE_ERROR(IoError, ErrorCode::kIo)
F2IND_DEFINE_ERROR(FormatError, ErrorCode::kFormat)
F2IND_DEFINE_ERROR(TruncatedError, ErrorCode::kTruncated)
F2IND_DEFINE_ERROR(CorruptError, ErrorCode::kCorrupt)
F2IND_DEFINE_ERROR(ShapeError, ErrorCode::kShape)
F2IND_DEFINE_ERROR(NumericError, ErrorCode::kNumeric)
F2IND_DEFINE_ERROR(CacheError, ErrorCode::kCache)
F2IND_DEFINE_ERROR(IndexError, ErrorCode::kIndex)
F2IND_DEFINE_ERROR(ScheduleError, ErrorCode::kSchedule)
F2IND_DEFINE_ERROR(EmptyError, ErrorCode::kEmpty)
F2IND_DEFINE_ERROR(UndefinedMetricError, ErrorCode::kUndefinedMetric)

#undef F2IND_DEFINE_ERROR

}  // namespace f2ind
