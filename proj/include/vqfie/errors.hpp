// Copyright 2026 The vqfie Authors
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

#include <stdexcept>
#include <string>

namespace vqfie {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

#define VQFIE_DEFINE_ERROR(Name)                                              \
    class Name : public Error {                                               \
      public:                                                                 \
        explicit Name(const std::string &what) : Error(#Name ": " + what) {}  \
    }

VQFIE_DEFINE_ERROR(NonHermitianInput);
VQFIE_DEFINE_ERROR(NegativeSpectrum);
VQFIE_DEFINE_ERROR(DimMismatch);
VQFIE_DEFINE_ERROR(PurityOutOfRange);
VQFIE_DEFINE_ERROR(SpectrumInvalid);
VQFIE_DEFINE_ERROR(ParamLengthMismatch);
VQFIE_DEFINE_ERROR(NonRotationSlot);
VQFIE_DEFINE_ERROR(MOutOfRange);
VQFIE_DEFINE_ERROR(NonPSDTMatrix);
VQFIE_DEFINE_ERROR(NumericalInconsistency);
VQFIE_DEFINE_ERROR(ZeroDelta);
VQFIE_DEFINE_ERROR(DegenerateLowSpectrum);
VQFIE_DEFINE_ERROR(InvalidArgument);
VQFIE_DEFINE_ERROR(ObjectiveEvaluationFailure);
VQFIE_DEFINE_ERROR(ConfigError);
VQFIE_DEFINE_ERROR(MalformedCSV);

#undef VQFIE_DEFINE_ERROR

} // namespace vqfie
