// Copyright 2026 The idread Authors.
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

#include "idread/common.hpp"
#include "idread/doctypes.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace idread {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateQuad: return "DegenerateQuad";
    case ErrorKind::ImageTooSmall: return "ImageTooSmall";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::InvalidQuality: return "InvalidQuality";
    case ErrorKind::MalformedStream: return "MalformedStream";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::UnsupportedConfig: return "UnsupportedConfig";
    case ErrorKind::InvalidName: return "InvalidName";
    case ErrorKind::EmptyList: return "EmptyList";
    case ErrorKind::TextOverflow: return "TextOverflow";
    case ErrorKind::PlacementInfeasible: return "PlacementInfeasible";
    case ErrorKind::MissingLayout: return "MissingLayout";
    case ErrorKind::EmptyManifest: return "EmptyManifest";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Rng derive_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x1d2e3a4bu};
  return Rng(seq);
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  workers.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    workers.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace idread

namespace idread {

namespace {
constexpr std::string_view kClassNames[kNumClasses] = {
    "paper-id-front",        "paper-id-back",         "electronic-id-front",
    "electronic-id-back",    "driving-license-front", "driving-license-back",
    "health-card-front",     "health-card-back",      "passport",
};
}  // namespace

std::string_view class_name(DocumentClass c) { return kClassNames[code(c)]; }

std::optional<DocumentClass> class_from_code(int value) {
  if (value < 0 || value >= kNumClasses) return std::nullopt;
  return static_cast<DocumentClass>(value);
}

std::optional<DocumentClass> class_from_name(std::string_view name) {
  for (int i = 0; i < kNumClasses; ++i)
    if (kClassNames[i] == name) return static_cast<DocumentClass>(i);
  return std::nullopt;
}

}  // namespace idread
