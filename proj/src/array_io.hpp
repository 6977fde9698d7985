// Copyright 2026 the prsp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PRSP_ARRAY_IO_HPP
#define PRSP_ARRAY_IO_HPP

#include <string>
#include <vector>

#include "core.hpp"

namespace prsp {

// Binary array container: 8-byte magic "PRSPAR01", then rows and cols as
// little-endian unsigned 64-bit integers, then rows*cols little-endian
// IEEE-754 doubles in row-major order. Save/load round-trips are bitwise.
inline constexpr char kArrayMagic[8] = {'P', 'R', 'S', 'P', 'A', 'R', '0', '1'};

void save_array(const std::string& path, const DenseMatrix& m);
DenseMatrix load_array(const std::string& path);

// CSV: one data point per row, comma separator, decimal point, no header.
DenseMatrix load_csv(const std::string& path);

// Array file by magic sniff, CSV otherwise; the integer kind is inferred
// from the entries.
DataSet load_dataset(const std::string& path);
void save_dataset(const std::string& path, const DataSet& data);

// Shortest decimal rendering that round-trips the exact double.
std::string format_double(double v);

void write_trace_csv(const std::string& path,
                     const std::vector<double>& free_energy,
                     const std::vector<double>& seconds);

}  // namespace prsp

#endif  // PRSP_ARRAY_IO_HPP
