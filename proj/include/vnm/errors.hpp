// Copyright 2026 The vnm-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace vnm {

/// Base class for every error raised by the library. `code()` is a stable
/// machine-readable identifier (it ends up in the CLI error JSON).
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define VNM_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                   \
   public:                                                      \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  };

VNM_DEFINE_ERROR(NonHermitianInput)
VNM_DEFINE_ERROR(DimensionMismatch)
VNM_DEFINE_ERROR(InvalidDensity)
VNM_DEFINE_ERROR(InvalidObservable)
VNM_DEFINE_ERROR(NotOrthonormal)
VNM_DEFINE_ERROR(MutuallyOrthogonalPair)
VNM_DEFINE_ERROR(InvalidProbe)
VNM_DEFINE_ERROR(UncenteredProbe)
VNM_DEFINE_ERROR(DegenerateProbe)
VNM_DEFINE_ERROR(GridTooNarrow)
VNM_DEFINE_ERROR(NotAProjector)
VNM_DEFINE_ERROR(OrthogonalPostselection)
VNM_DEFINE_ERROR(SingularInversion)
VNM_DEFINE_ERROR(NegativeDensity)
VNM_DEFINE_ERROR(TooFewSamples)
VNM_DEFINE_ERROR(InvalidArgument)

#undef VNM_DEFINE_ERROR

}  // namespace vnm
