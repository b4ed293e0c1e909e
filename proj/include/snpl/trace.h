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

// JSON rendering of run traces. Every document carries `schema_version` and a
// `method` discriminator.

#ifndef SNPL_TRACE_H_
#define SNPL_TRACE_H_

#include "json.hpp"
#include "snpl/baselines.h"
#include "snpl/bounds.h"
#include "snpl/snpl.h"

namespace snpl {

nlohmann::json ToJson(const Decision& decision);
nlohmann::json ToJson(const LowerBoundTable& table);
nlohmann::json ToJson(const SnplTrace& trace);
nlohmann::json ToJson(const HcpiTrace& trace);
nlohmann::json ToJson(const BonferroniTrace& trace);

}  // namespace snpl

#endif  // SNPL_TRACE_H_
