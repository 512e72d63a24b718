#include "ace/matrix.hpp"

#include <cmath>

namespace ace {

std::vector<double> Matrix::column(std::size_t c) const {
    std::vector<double> out(rows);
    for (std::size_t r = 0; r < rows; ++r) out[r] = at(r, c);
    return out;
}

bool Matrix::allFinite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

double mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
    double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

StandardizeResult standardize(const Matrix& data) {
    if (data.rows < 2)
        throw InsufficientDataError("standardize: need at least 2 rows, got " +
                                    std::to_string(data.rows));
    StandardizeResult out;
    out.data = Matrix(data.rows, data.cols);
    out.constantColumn.assign(data.cols, false);
    for (std::size_t c = 0; c < data.cols; ++c) {
        auto col = data.column(c);
        double m = mean(col);
        double sd = std::sqrt(variance(col));
        if (sd < 1e-12) {
            out.constantColumn[c] = true;
            out.anyConstant = true;
            for (std::size_t r = 0; r < data.rows; ++r) out.data.at(r, c) = 0.0;
        } else {
            for (std::size_t r = 0; r < data.rows; ++r)
                out.data.at(r, c) = (data.at(r, c) - m) / sd;
        }
    }
    return out;
}

SimpleRegression leastSquaresResidual(std::span<const double> x,
                                      std::span<const double> y) {
    if (x.size() != y.size())
        throw ShapeError("leastSquaresResidual: length mismatch");
    if (x.size() < 2)
        throw InsufficientDataError("leastSquaresResidual: need >= 2 samples");
    double vx = variance(x);
    if (vx < 1e-12)
        throw DegenerateVariableError(
            "leastSquaresResidual: regressor has zero variance");
    double mx = mean(x);
    double my = mean(y);
    double cov = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        cov += (x[i] - mx) * (y[i] - my);
    cov /= static_cast<double>(x.size());

    SimpleRegression out;
    out.coefficient = cov / vx;
    out.residual.resize(y.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out.residual[i] = y[i] - out.coefficient * x[i];
    return out;
}

}  // namespace ace
