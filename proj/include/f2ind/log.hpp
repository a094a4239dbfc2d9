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

#include <sstream>
#include <string>

namespace f2ind::log {

enum class Level : int { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

// Reads F2IND_LOG once ("error", "warn", "info", "debug" or 0-3).
// Defaults to warn.
Level threshold();
void set_threshold(Level level);
bool enabled(Level level);
void write(Level level, const std::string& message);

template <typename... Args>
void emit(Level level, Args&&... args) {
  if (!enabled(level)) return;
  std::ostringstream os;
  (os << ... << args);
  write(level, os.str());
}

template <typename... Args>
void warn(Args&&... args) { emit(Level::kWarn, std::forward<Args>(args)...); }
template <typename... Args>
void info(Args&&... args) { emit(Level::kInfo, std::forward<Args>(args)...); }
template <typename... Args>
void debug(Args&&... args) { emit(Level::kDebug, std::forward<Args>(args)...); }

}  // namespace f2ind::log
