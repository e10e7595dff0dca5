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

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace idread {

enum class ErrorKind {
  DegenerateQuad,
  ImageTooSmall,
  ShapeMismatch,
  InvalidQuality,
  MalformedStream,
  IoError,
  FormatError,
  EmptyDataset,
  UnsupportedConfig,
  InvalidName,
  EmptyList,
  TextOverflow,
  PlacementInfeasible,
  MissingLayout,
  EmptyManifest,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the ErrorKind codes so
/// callers (notably the CLI) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Round-half-to-even, the single rounding rule used throughout.
inline double round_even(double v) { return std::nearbyint(v); }
inline long round_even_l(double v) { return std::lrint(v); }

using Rng = std::mt19937_64;

/// Independent stream for item `index` of a run seeded with `seed`; makes
/// per-item work identical whether it runs serially or in parallel.
Rng derive_rng(std::uint64_t seed, std::uint64_t index);

/// Runs body(i) for i in [0, n) on up to `threads` workers (0 = hardware
/// concurrency). Work distribution is static; callers own any reduction order.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace idread
