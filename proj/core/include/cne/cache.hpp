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

#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

namespace cne {

/// Content-addressed store of provider responses: one JSON file per request
/// hash. Writes are serialized and atomic so concurrent lookups never see a
/// partial entry. Replaying a warmed cache makes the pipeline hermetic.
class JsonFileCache {
 public:
  explicit JsonFileCache(std::filesystem::path directory);

  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, const std::string& json_text);
  bool contains(const std::string& key) const;
  const std::filesystem::path& directory() const { return directory_; }

 private:
  std::filesystem::path entry_path(const std::string& key) const;

  std::filesystem::path directory_;
  mutable std::mutex mutex_;
};

}  // namespace cne
