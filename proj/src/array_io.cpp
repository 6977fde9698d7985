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

#include "array_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace prsp {

namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

std::uint64_t to_le64(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big)
    return __builtin_bswap64(v);
  return v;
}

void write_le_doubles(std::ofstream& out, const double* p, std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(p),
              static_cast<std::streamsize>(n * sizeof(double)));
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t bits;
      std::memcpy(&bits, &p[i], 8);
      bits = to_le64(bits);
      out.write(reinterpret_cast<const char*>(&bits), 8);
    }
  }
}

}  // namespace

void save_array(const std::string& path, const DenseMatrix& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write file: " + path);
  out.write(kArrayMagic, 8);
  const std::uint64_t rows = to_le64(m.rows());
  const std::uint64_t cols = to_le64(m.cols());
  out.write(reinterpret_cast<const char*>(&rows), 8);
  out.write(reinterpret_cast<const char*>(&cols), 8);
  write_le_doubles(out, m.data(), m.size());
  if (!out) throw DataError("write failed: " + path);
}

DenseMatrix load_array(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  char magic[8];
  in.read(magic, 8);
  if (in.gcount() != 8 || std::memcmp(magic, kArrayMagic, 8) != 0)
    throw DataError(path + ": not a PRSPAR01 file");
  std::uint64_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), 8);
  in.read(reinterpret_cast<char*>(&cols), 8);
  if (!in) throw DataError(path + ": truncated header");
  rows = to_le64(rows);
  cols = to_le64(cols);
  if (rows != 0 && cols > (1ull << 48) / rows)
    throw DataError(path + ": implausible array shape");
  DenseMatrix m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != m.size() * sizeof(double))
    throw DataError(path + ": payload shorter than header promises");
  if constexpr (std::endian::native == std::endian::big) {
    double* p = m.data();
    for (std::size_t i = 0; i < m.size(); ++i) {
      std::uint64_t bits;
      std::memcpy(&bits, &p[i], 8);
      bits = __builtin_bswap64(bits);
      std::memcpy(&p[i], &bits, 8);
    }
  }
  return m;
}

DenseMatrix load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::vector<double> values;
  std::size_t cols = 0, rows = 0, line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t row_cols = 0;
    const char* p = line.data();
    const char* end = p + line.size();
    for (;;) {
      while (p < end && *p == ' ') ++p;
      double v = 0.0;
      const auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc())
        throw DataError(path + ": line " + std::to_string(line_no) +
                        ": malformed number");
      values.push_back(v);
      ++row_cols;
      p = next;
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      if (*p != ',')
        throw DataError(path + ": line " + std::to_string(line_no) +
                        ": expected ','");
      ++p;
    }
    if (cols == 0) {
      cols = row_cols;
    } else if (row_cols != cols) {
      throw DataError(path + ": line " + std::to_string(line_no) + ": expected " +
                      std::to_string(cols) + " columns, found " +
                      std::to_string(row_cols));
    }
    ++rows;
  }
  if (rows == 0) throw DataError(path + ": empty dataset");
  return DenseMatrix(rows, cols, std::move(values));
}

DataSet load_dataset(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw DataError("cannot open file: " + path);
  char head[8] = {};
  probe.read(head, 8);
  const std::size_t got = static_cast<std::size_t>(probe.gcount());
  probe.close();
  if (got == 8 && std::memcmp(head, kArrayMagic, 8) == 0)
    return DataSet::wrap(load_array(path));
  // A near-magic prefix is a versioned binary file, not a CSV.
  if (got >= 4 && std::memcmp(head, kArrayMagic, 4) == 0)
    throw DataError(path + ": not a PRSPAR01 file");
  return DataSet::wrap(load_csv(path));
}

void save_dataset(const std::string& path, const DataSet& data) {
  save_array(path, data.y);
}

std::string format_double(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error("format_double failed");
  return std::string(buf, end);
}

void write_trace_csv(const std::string& path,
                     const std::vector<double>& free_energy,
                     const std::vector<double>& seconds) {
  if (free_energy.size() != seconds.size())
    throw ConfigError("trace: column length mismatch");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write file: " + path);
  out << "iteration,free_energy,seconds\n";
  for (std::size_t i = 0; i < free_energy.size(); ++i)
    out << i << ',' << format_double(free_energy[i]) << ','
        << format_double(seconds[i]) << '\n';
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace prsp
