#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "dyadnet/dyadic.hpp"
#include "dyadnet/errors.hpp"

namespace dyadnet {

struct RealMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data; // row-major

    RealMatrix() = default;

    RealMatrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {
        if (r <= 0 || c <= 0) throw Error("RealMatrix: non-positive dimensions");
    }

    RealMatrix(int r, int c, std::vector<double> d) : rows(r), cols(c), data(std::move(d)) {
        if (r <= 0 || c <= 0) throw Error("RealMatrix: non-positive dimensions");
        if (data.size() != static_cast<std::size_t>(r) * c)
            throw Error("RealMatrix: data size does not match dimensions");
        for (double v : data)
            if (!std::isfinite(v)) throw Error("RealMatrix: non-finite entry");
    }

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
    std::size_t size() const { return data.size(); }

    friend bool operator==(const RealMatrix&, const RealMatrix&) = default;

    /// Whitespace-separated rows, one matrix row per line.
    static RealMatrix parse_text(const std::string& text) {
        std::vector<double> values;
        int rows = 0, cols = -1;
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line)) {
            std::istringstream fields(line);
            std::vector<double> row;
            double v;
            while (fields >> v) row.push_back(v);
            if (row.empty()) continue;
            if (cols < 0) cols = static_cast<int>(row.size());
            if (static_cast<int>(row.size()) != cols)
                throw DataError("matrix text: ragged row " + std::to_string(rows + 1));
            values.insert(values.end(), row.begin(), row.end());
            ++rows;
        }
        if (rows == 0) throw DataError("matrix text: no rows");
        return RealMatrix(rows, cols, std::move(values));
    }
};

struct DyadicMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<DyadicRational> data; // row-major

    DyadicMatrix() = default;
    DyadicMatrix(int r, int c)
        : rows(r), cols(c), data(static_cast<std::size_t>(r) * c) {}

    DyadicRational& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    const DyadicRational& at(int r, int c) const {
        return data[static_cast<std::size_t>(r) * cols + c];
    }

    double value_at(int r, int c) const { return at(r, c).value(); }

    RealMatrix to_real() const {
        RealMatrix m(rows, cols);
        for (std::size_t i = 0; i < data.size(); ++i) m.data[i] = data[i].value();
        return m;
    }

    friend bool operator==(const DyadicMatrix&, const DyadicMatrix&) = default;
};

} // namespace dyadnet
