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

#include "oqbm/csv.hpp"

#include <cstdio>
#include <fstream>

#include "oqbm/errors.hpp"

namespace oqbm {

void CsvTable::add_row(std::vector<double> row) {
    if (row.size() != header.size()) throw DimensionError("CsvTable " + name + ": row width differs from header");
    rows.push_back(std::move(row));
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string to_csv(const CsvTable& table) {
    std::string out;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (c) out += ',';
        out += table.header[c];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += format_double(row[c]);
        }
        out += '\n';
    }
    return out;
}

void write_csv(const CsvTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << to_csv(table);
}

std::vector<std::string> matrix_columns(int dim, const std::string& prefix) {
    std::vector<std::string> cols;
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            const std::string ij = std::to_string(i) + std::to_string(j);
            cols.push_back(prefix + "re_" + ij);
            cols.push_back(prefix + "im_" + ij);
        }
    }
    return cols;
}

void append_matrix(std::vector<double>& row, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j).real());
            row.push_back(m(i, j).imag());
        }
    }
}

CsvTable field_table(const std::string& name, const std::vector<double>& x, const std::vector<Matrix>& values) {
    if (x.size() != values.size()) throw DimensionError("field_table: positions and values differ in length");
    CsvTable t;
    t.name = name;
    const int d = values.empty() ? 0 : static_cast<int>(values.front().rows());
    t.header.push_back("x");
    for (auto& c : matrix_columns(d)) t.header.push_back(c);
    t.header.push_back("trace");
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::vector<double> row{x[i]};
        append_matrix(row, values[i]);
        row.push_back(values[i].trace().real());
        t.add_row(std::move(row));
    }
    return t;
}

CsvTable lattice_table(const std::string& name, const LatticeField& field) {
    std::vector<double> x;
    for (int i = 0; i < field.n_sites(); ++i) x.push_back(field.position(i));
    return field_table(name, x, field.sites());
}

CsvTable qfield_table(const std::string& name, const QField& field) {
    std::vector<double> x;
    for (int i = 0; i < field.grid.n_points; ++i) x.push_back(field.grid.x(i));
    return field_table(name, x, field.values);
}

}  // namespace oqbm
