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

#include "snpl/csv_io.h"

#include <charconv>
#include <fstream>
#include <map>
#include <optional>

namespace snpl {
namespace {

std::vector<std::string> SplitLine(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cell);
      cell.clear();
    } else if (ch != '\r' && ch != ' ' && ch != '"') {
      cell.push_back(ch);
    }
  }
  out.push_back(cell);
  return out;
}

std::string OnLine(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

// Columns named prefix1..prefixK in any position; returns their indices.
std::vector<int> Numbered(const std::map<std::string, int>& header,
                          const std::string& prefix) {
  std::vector<int> cols;
  for (int k = 1;; ++k) {
    auto it = header.find(prefix + std::to_string(k));
    if (it == header.end()) break;
    cols.push_back(it->second);
  }
  for (const auto& [name, idx] : header) {
    if (name.rfind(prefix, 0) == 0 && name.size() > prefix.size() &&
        name.find_first_not_of("0123456789", prefix.size()) ==
            std::string::npos) {
      const int k = std::stoi(name.substr(prefix.size()));
      if (k < 1 || k > static_cast<int>(cols.size())) {
        throw ValidationError("column " + name + " breaks the " + prefix +
                              "1.." + prefix + "N sequence");
      }
    }
  }
  return cols;
}

double ParseCell(const std::string& cell, std::size_t line,
                 const std::string& column, std::size_t row) {
  double v = 0.0;
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (cell.empty() || ec != std::errc() || ptr != end) {
    throw ValidationError(
        OnLine(line, "bad value '" + cell + "' in column " + column), row);
  }
  return v;
}

}  // namespace

Dataset ReadDatasetCsv(std::istream& in, const CsvSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("CSV is empty");
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  const std::vector<std::string> names = SplitLine(line);
  std::map<std::string, int> header;
  for (int i = 0; i < static_cast<int>(names.size()); ++i) {
    if (!header.emplace(names[i], i).second) {
      throw ValidationError(OnLine(1, "duplicate column " + names[i]));
    }
  }
  if (!header.contains("a")) {
    throw ValidationError(OnLine(1, "missing required column 'a'"));
  }
  const int a_col = header.at("a");
  const std::vector<int> x_cols = Numbered(header, "x");
  const std::vector<int> y_cols = Numbered(header, "y");
  const std::vector<int> e_cols = Numbered(header, "e");
  if (y_cols.empty()) throw ValidationError(OnLine(1, "no outcome columns"));
  const std::size_t known = 1 + x_cols.size() + y_cols.size() + e_cols.size();
  if (known != names.size()) {
    throw ValidationError(OnLine(1, "unrecognized columns in header"));
  }
  const int k_count = schema.num_actions;
  const bool per_row = schema.propensity.empty();
  if (per_row && static_cast<int>(e_cols.size()) != k_count) {
    throw ValidationError(OnLine(1, "expected propensity columns e1..e" +
                                        std::to_string(k_count)));
  }
  if (!per_row && static_cast<int>(schema.propensity.size()) != k_count) {
    throw ValidationError("propensity needs one entry per action");
  }

  std::vector<Observation> obs;
  std::vector<double> props;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::size_t row = obs.size();
    const std::vector<std::string> cells = SplitLine(line);
    if (cells.size() != names.size()) {
      throw ValidationError(
          OnLine(line_no, "expected " + std::to_string(names.size()) +
                              " fields, got " + std::to_string(cells.size())),
          row);
    }
    Observation o;
    for (std::size_t i = 0; i < x_cols.size(); ++i) {
      o.covariates.push_back(ParseCell(cells[x_cols[i]], line_no,
                                       names[x_cols[i]], row));
    }
    const double a = ParseCell(cells[a_col], line_no, "a", row);
    if (a != static_cast<double>(static_cast<int>(a))) {
      throw ValidationError(OnLine(line_no, "action is not an integer"), row);
    }
    o.action = static_cast<int>(a);
    for (int c : y_cols) {
      o.outcomes.push_back(ParseCell(cells[c], line_no, names[c], row));
    }
    if (per_row) {
      for (int c : e_cols) {
        props.push_back(ParseCell(cells[c], line_no, names[c], row));
      }
    } else {
      props.insert(props.end(), schema.propensity.begin(),
                   schema.propensity.end());
    }
    obs.push_back(std::move(o));
  }
  if (obs.empty()) throw ValidationError("CSV has no data rows");
  return Dataset(obs, k_count, std::move(props), schema.positivity_floor);
}

Dataset LoadDatasetCsv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return ReadDatasetCsv(in, schema);
}

}  // namespace snpl
