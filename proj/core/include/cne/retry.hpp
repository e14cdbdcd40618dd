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

#include <chrono>
#include <cmath>
#include <string>
#include <thread>

#include "cne/errors.hpp"

namespace cne {

struct RetryPolicy {
  int max_attempts = 3;
  int base_delay_ms = 100;
  double backoff_factor = 2.0;
};

/// Run `fn(attempt)` with exponential backoff on retryable ProviderErrors.
/// Exhaustion rethrows a hard ProviderError carrying the attempt count.
template <typename Fn>
auto with_retries(const RetryPolicy& policy, Fn&& fn) {
  int attempt = 0;
  for (;;) {
    ++attempt;
    try {
      return fn(attempt);
    } catch (const ProviderError& e) {
      if (!e.retryable() || attempt >= policy.max_attempts) {
        throw ProviderError(std::string(e.what()) + " (attempts=" + std::to_string(attempt) + ")",
                            /*retryable=*/false, attempt);
      }
      const double delay =
          policy.base_delay_ms * std::pow(policy.backoff_factor, attempt - 1);
      if (delay > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long>(delay)));
      }
    }
  }
}

}  // namespace cne
