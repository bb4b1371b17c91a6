#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace meshdqn {

/// Dense row-major matrix of 64-bit floats.
struct Tensor {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {
        if (r < 0 || c < 0) throw std::invalid_argument("negative tensor shape");
    }

    static Tensor zeros(int r, int c) { return Tensor(r, c); }

    static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows_in) {
        Tensor t(static_cast<int>(rows_in.size()),
                 rows_in.size() ? static_cast<int>(rows_in.begin()->size()) : 0);
        int r = 0;
        for (const auto& row : rows_in) {
            if (static_cast<int>(row.size()) != t.cols)
                throw std::invalid_argument("ragged tensor literal");
            int c = 0;
            for (double v : row) t.at(r, c++) = v;
            ++r;
        }
        return t;
    }

    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    size_t size() const { return data.size(); }
    bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

}  // namespace meshdqn
