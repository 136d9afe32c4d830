#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace harbench {

/// Dense row-major matrix of doubles. Rows are time steps throughout the
/// data pipeline; columns are channels or features.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    const double* row_ptr(std::size_t r) const { return data.data() + r * cols; }
    double* row_ptr(std::size_t r) { return data.data() + r * cols; }

    bool operator==(const Matrix&) const = default;
};

}  // namespace harbench
