/*
   Copyright 2026 the adlab authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>

namespace adlab {

/// Error categories surfaced by the library. Each maps to a failure mode a
/// caller may reasonably want to branch on.
enum class errc {
    parameter,        // non-positive or out-of-range input
    non_morse,        // degenerate Hessian at a critical point
    empty_landscape,  // no critical points found in the search box
    degenerate_wells, // equal well depths within tolerance
    not_double_well,  // wrong critical-point census
    topology,         // missing/inconsistent saddle data
    near_resonant,    // assembled polynomial system numerically singular
    domain_too_small, // kernel vector has not decayed at the x-boundary
    geometry,         // cutoff region misclassification / overlapping supports
    accuracy,         // quadrature did not reach the requested tolerance
    singular,         // factorization at or near an eigenvalue
    convergence,      // iterative solver ran out of iterations
    instability,      // SDE trajectory blow-up
    config,           // experiment configuration violation
    io,               // file system failure
};

class Error : public std::runtime_error {
  public:
    Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    errc code() const noexcept { return code_; }

  private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

} // namespace adlab
