#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ace/common.hpp"

namespace ace {

// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) {
        return {data.data() + r * cols, cols};
    }
    std::span<const double> row(std::size_t r) const {
        return {data.data() + r * cols, cols};
    }

    std::vector<double> column(std::size_t c) const;

    bool allFinite() const;
};

struct StandardizeResult {
    Matrix data;
    // Columns with (numerically) zero variance, returned as all zeros.
    std::vector<bool> constantColumn;
    bool anyConstant = false;
};

// Per-column zero mean, unit variance (population 1/n convention).
// Throws InsufficientDataError for fewer than 2 rows.
StandardizeResult standardize(const Matrix& data);

struct SimpleRegression {
    double coefficient = 0.0;
    std::vector<double> residual;
};

// Simple least squares of y on x: coefficient = cov(x,y)/var(x),
// residual = y - coefficient * x. Throws DegenerateVariableError when
// var(x) is numerically zero.
SimpleRegression leastSquaresResidual(std::span<const double> x,
                                      std::span<const double> y);

double mean(std::span<const double> v);
double variance(std::span<const double> v);  // population (1/n)

}  // namespace ace
