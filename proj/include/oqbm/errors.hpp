// Copyright 2026 The OQBM Toolkit Authors
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

#ifndef OQBM_ERRORS_HPP
#define OQBM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace oqbm {

// Operand shapes do not fit together.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// An input violates a documented precondition (non-Hermitian, non-unitary, ...).
struct ContractViolation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A state refers to vertices/sites outside the structure it is applied to.
struct DomainError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

// Every transition of a trajectory step has vanishing probability.
struct DegenerateStep : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A stochastic integration produced a non-normalizable state.
struct IntegrationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Step size or grid settings violate a stability bound, or the run drifted.
struct StepSizeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Register or enumeration size beyond the supported capacity.
struct CapacityError : std::length_error {
    using std::length_error::length_error;
};

// Lattice window lacks the zero padding needed by a shift.
struct PaddingError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct Unsupported : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace oqbm

#endif  // OQBM_ERRORS_HPP
