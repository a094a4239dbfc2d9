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
#include "f2ind/errors.hpp"

namespace f2ind {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kOk: return "ok";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kFormat: return "FormatError";
    case ErrorCode::kTruncated: return "TruncatedError";
    case ErrorCode::kCorrupt: return "CorruptError";
    case ErrorCode::kShape: return "ShapeError";
    case ErrorCode::kNumeric: return "NumericError";
    case ErrorCode::kCache: return "CacheError";
    case ErrorCode::kIndex: return "IndexError";
    case ErrorCode::kSchedule: return "ScheduleError";
    case ErrorCode::kEmpty: return "EmptyError";
    case ErrorCode::kUndefinedMetric: return "UndefinedMetricError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInternal: return "InternalError";
  }
  return "unknown";
}

}  // namespace f2ind
