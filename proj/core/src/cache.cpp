// Copyright 2026 The CNE Authors
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

#include "cne/cache.hpp"

#include "cne/errors.hpp"
#include "cne/io.hpp"

namespace cne {

namespace fs = std::filesystem;

JsonFileCache::JsonFileCache(fs::path directory) : directory_(std::move(directory)) {
  std::error_code ec;
  fs::create_directories(directory_, ec);
  if (ec) throw IoError("cannot create cache directory " + directory_.string() + ": " + ec.message());
}

fs::path JsonFileCache::entry_path(const std::string& key) const {
  return directory_ / (key + ".json");
}

std::optional<std::string> JsonFileCache::get(const std::string& key) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const fs::path path = entry_path(key);
  if (!fs::exists(path)) return std::nullopt;
  return read_text_file(path);
}

bool JsonFileCache::contains(const std::string& key) const {
  std::lock_guard<std::mutex> lock(mutex_);
  return fs::exists(entry_path(key));
}

void JsonFileCache::put(const std::string& key, const std::string& json_text) {
  std::lock_guard<std::mutex> lock(mutex_);
  write_text_file(entry_path(key), json_text);
}

}  // namespace cne
