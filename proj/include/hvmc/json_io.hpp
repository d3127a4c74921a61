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

// Small helpers for reading typed values out of nlohmann::json with error
// messages that carry the dotted key path.

#ifndef HVMC_JSON_IO_HPP_
#define HVMC_JSON_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "hvmc/common.hpp"

namespace hvmc::json_io {

using json = nlohmann::json;

inline std::string join(std::string_view path, std::string_view key) {
  if (path.empty()) return std::string(key);
  return std::string(path) + "." + std::string(key);
}

[[noreturn]] inline void fail(std::string_view path, const std::string& msg) {
  throw Error(ErrorCode::kParse, msg, std::string(path));
}

inline const json& at(const json& j, std::string_view key,
                      std::string_view path) {
  if (!j.is_object() || !j.contains(key)) {
    fail(join(path, key), "missing key");
  }
  return j.at(std::string(key));
}

inline double as_number(const json& j, std::string_view path) {
  if (!j.is_number()) fail(path, "expected a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

inline double number(const json& j, std::string_view key,
                     std::string_view path) {
  return as_number(at(j, key, path), join(path, key));
}

inline double number_or(const json& j, std::string_view key, double fallback,
                        std::string_view path) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return number(j, key, path);
}

inline std::string string(const json& j, std::string_view key,
                          std::string_view path) {
  const json& v = at(j, key, path);
  if (!v.is_string()) fail(join(path, key), "expected a string");
  return v.get<std::string>();
}

inline Vec3 as_vec3(const json& j, std::string_view path) {
  if (!j.is_array() || j.size() != 3) fail(path, "expected [x, y, z]");
  Vec3 v;
  for (int i = 0; i < 3; ++i) v[i] = as_number(j[i], path);
  return v;
}

inline Vec3 vec3(const json& j, std::string_view key, std::string_view path) {
  return as_vec3(at(j, key, path), join(path, key));
}

inline Vec3 vec3_or(const json& j, std::string_view key, const Vec3& fallback,
                    std::string_view path) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return vec3(j, key, path);
}

inline json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json parse_text(std::string_view text, std::string_view what);
json parse_file(const std::filesystem::path& path);

// 64-bit FNV-1a over the compact dump; stable across runs and platforms.
std::uint64_t content_hash(const json& j);
std::string hex64(std::uint64_t v);

}  // namespace hvmc::json_io

#endif  // HVMC_JSON_IO_HPP_
