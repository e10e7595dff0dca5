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


// Helpers shared by the unit tests.

#pragma once

#include <filesystem>
#include <string>

#include "doctest.h"
#include "idread/common.hpp"

namespace idread::testing {

template <typename F>
void expect_error(ErrorKind kind, F&& f) {
  try {
    f();
    FAIL("expected " << to_string(kind));
  } catch (const Error& e) {
    CHECK_MESSAGE(e.kind() == kind, e.what());
  }
}

/// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("idread_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace idread::testing
