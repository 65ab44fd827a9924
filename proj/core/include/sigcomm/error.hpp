// Copyright 2026 The sigcomm Authors
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

#ifndef SIGCOMM_ERROR_HPP_
#define SIGCOMM_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace sigcomm {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller violated a documented precondition (bad sizes, out-of-range ids).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A genome or network references nodes that do not exist, or repeats edges.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// A neuron potential became non-finite during integration.
class NumericOverflowError : public Error {
 public:
  NumericOverflowError(int neuron_id, const std::string& what)
      : Error(what), neuron_id_(neuron_id) {}
  int neuron_id() const noexcept { return neuron_id_; }

 private:
  int neuron_id_;
};

// Analysis input that has no meaningful answer (e.g. a zero first signal).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Malformed or incompatible serialized data / configuration.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace sigcomm

#endif  // SIGCOMM_ERROR_HPP_
