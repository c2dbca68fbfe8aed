// Copyright 2026 The polpath Authors
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

#ifndef POLPATH_ERROR_HPP
#define POLPATH_ERROR_HPP

#include <stdexcept>
#include <string>

namespace polpath {

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// A physically or logically invalid request: out-of-range parameters,
/// states outside an encoding, impossible measurement outcomes.
class DomainError : public std::domain_error {
   public:
    using std::domain_error::domain_error;
};

/// Data analysis could not be carried out (underdetermined fit,
/// rank-deficient tomography, degenerate counts).
class AnalysisError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

}  // namespace polpath

#endif
