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

#ifndef OQBM_CSV_HPP
#define OQBM_CSV_HPP

// Numeric CSV tables written with 17 significant digits so that a rerun
// with the same inputs reproduces the file byte for byte.

#include <string>
#include <vector>

#include "oqbm/lindblad.hpp"
#include "oqbm/linalg.hpp"
#include "oqbm/oqbm_discrete.hpp"

namespace oqbm {

struct CsvTable {
    std::string name;  // file stem
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    void add_row(std::vector<double> row);
};

std::string format_double(double v);
std::string to_csv(const CsvTable& table);
void write_csv(const CsvTable& table, const std::string& path);

// Column names re_ij, im_ij in row-major entry order.
std::vector<std::string> matrix_columns(int dim, const std::string& prefix = "");
void append_matrix(std::vector<double>& row, const Matrix& m);

// Columns: x, re_00, im_00, ..., trace.
CsvTable field_table(const std::string& name, const std::vector<double>& x, const std::vector<Matrix>& values);
CsvTable lattice_table(const std::string& name, const LatticeField& field);
CsvTable qfield_table(const std::string& name, const QField& field);

}  // namespace oqbm

#endif  // OQBM_CSV_HPP
