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

#include <array>
#include <optional>
#include <string_view>

namespace idread {

/// The nine document types; the integer codes are stable and appear in
/// manifests, model outputs and reports.
enum class DocumentClass : int {
  PaperIdFront = 0,
  PaperIdBack = 1,
  ElectronicIdFront = 2,
  ElectronicIdBack = 3,
  DrivingLicenseFront = 4,
  DrivingLicenseBack = 5,
  HealthCardFront = 6,
  HealthCardBack = 7,
  Passport = 8,
};

inline constexpr int kNumClasses = 9;

inline constexpr std::array<DocumentClass, kNumClasses> kAllClasses{
    DocumentClass::PaperIdFront,        DocumentClass::PaperIdBack,        DocumentClass::ElectronicIdFront,
    DocumentClass::ElectronicIdBack,    DocumentClass::DrivingLicenseFront, DocumentClass::DrivingLicenseBack,
    DocumentClass::HealthCardFront,     DocumentClass::HealthCardBack,     DocumentClass::Passport,
};

inline constexpr int code(DocumentClass c) { return static_cast<int>(c); }

std::string_view class_name(DocumentClass c);
std::optional<DocumentClass> class_from_code(int code);
std::optional<DocumentClass> class_from_name(std::string_view name);

}  // namespace idread
