//
// Copyright 2026 The SNPL Authors
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
//

#ifndef SNPL_RNG_H_
#define SNPL_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace snpl {

using Rng = std::mt19937_64;

// splitmix64 finalizer.
std::uint64_t Mix64(std::uint64_t x);

// Child seed for stream `stream` of `master`: Mix64(master ^ Mix64(stream)).
// Used for per-replication and per-method streams so results do not depend on
// execution order or on which other streams were drawn.
std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t stream);
std::uint64_t DeriveSeed(std::uint64_t master, std::string_view label);

// Uniform on the open interval (0, 1), 53-bit resolution.
double UniformOpen(Rng& rng);

}  // namespace snpl

#endif  // SNPL_RNG_H_
