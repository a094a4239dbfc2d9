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
#include "f2ind/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string_view>

namespace f2ind::log {
namespace {

Level parse_env() {
  const char* raw = std::getenv("F2IND_LOG");
  if (raw == nullptr) return Level::kWarn;
  std::string_view v(raw);
  if (v == "error" || v == "0") return Level::kError;
  if (v == "warn" || v == "1") return Level::kWarn;
  if (v == "info" || v == "2") return Level::kInfo;
  if (v == "debug" || v == "3") return Level::kDebug;
  return Level::kWarn;
}

std::atomic<int>& current() {
  static std::atomic<int> level{static_cast<int>(parse_env())};
  return level;
}

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

const char* tag(Level level) {
  switch (level) {
    case Level::kError: return "error";
    case Level::kWarn: return "warn";
    case Level::kInfo: return "info";
    case Level::kDebug: return "debug";
  }
  return "?";
}

}  // namespace

Level threshold() { return static_cast<Level>(current().load()); }
void set_threshold(Level level) { current().store(static_cast<int>(level)); }
bool enabled(Level level) {
  return static_cast<int>(level) <= current().load();
}

void write(Level level, const std::string& message) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  std::cerr << "[f2ind " << tag(level) << "] " << message << '\n';
}

}  // namespace f2ind::log
