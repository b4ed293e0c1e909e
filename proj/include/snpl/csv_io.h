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

// Dataset CSV reader: header `x1..xd,a,y1..ydY[,e1..eK]`, header required.

#ifndef SNPL_CSV_IO_H_
#define SNPL_CSV_IO_H_

#include <istream>
#include <string>
#include <vector>

#include "snpl/core.h"

namespace snpl {

struct CsvSchema {
  int num_actions = 2;
  // Constant per-arm propensities; empty requires e1..eK columns.
  std::vector<double> propensity;
  double positivity_floor = 0.5;
};

// Shape and parse errors throw ValidationError naming the CSV line. Value
// checks (ranges, positivity) are left to ValidateDataset, whose row index
// is the 0-based data row.
Dataset ReadDatasetCsv(std::istream& in, const CsvSchema& schema);
Dataset LoadDatasetCsv(const std::string& path, const CsvSchema& schema);

}  // namespace snpl

#endif  // SNPL_CSV_IO_H_
