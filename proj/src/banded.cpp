#include "banded.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "errors.hpp"

namespace maxq {

namespace {
constexpr double kPivotFloor = 1e-14;
}

BandMatrix::BandMatrix(std::size_t n, std::size_t lower, std::size_t upper)
    : n_(n), lower_(lower), upper_(upper), data_(n * (lower + upper + 1), 0.0) {}

double& BandMatrix::at(std::size_t row, std::size_t col) {
    if (!in_band(row, col)) throw InvalidArgument("band matrix: entry outside the band");
    return data_[row * (lower_ + upper_ + 1) + (col + lower_ - row)];
}

double BandMatrix::at(std::size_t row, std::size_t col) const {
    if (!in_band(row, col)) return 0.0;
    return data_[row * (lower_ + upper_ + 1) + (col + lower_ - row)];
}

std::vector<double> solve_dense(std::vector<double> a, std::vector<double> rhs) {
    const std::size_t n = rhs.size();
    if (a.size() != n * n) throw InvalidArgument("dense solve: dimension mismatch");
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
        if (std::abs(a[piv * n + col]) < kPivotFloor)
            throw NumericFailure("dense solve: matrix is singular to working precision");
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
            std::swap(rhs[col], rhs[piv]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double m = a[r * n + col] / a[col * n + col];
            if (m == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r * n + c] -= m * a[col * n + c];
            rhs[r] -= m * rhs[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = rhs[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a[i * n + c] * x[c];
        x[i] = s / a[i * n + i];
    }
    return x;
}

std::vector<double> solve_banded(const BandMatrix& a, std::span<const double> rhs) {
    const std::size_t n = a.size();
    if (rhs.size() != n) throw InvalidArgument("banded solve: dimension mismatch");
    BandMatrix lu = a;
    std::vector<double> y(rhs.begin(), rhs.end());
    bool fallback = false;
    for (std::size_t k = 0; k < n && !fallback; ++k) {
        const double pivot = lu.at(k, k);
        if (std::abs(pivot) < kPivotFloor) {
            fallback = true;
            break;
        }
        const std::size_t row_end = std::min(n, k + a.lower() + 1);
        const std::size_t col_end = std::min(n, k + a.upper() + 1);
        for (std::size_t r = k + 1; r < row_end; ++r) {
            const double m = lu.at(r, k) / pivot;
            if (m == 0.0) continue;
            lu.at(r, k) = 0.0;
            for (std::size_t c = k + 1; c < col_end; ++c) lu.at(r, c) -= m * lu.at(k, c);
            y[r] -= m * y[k];
        }
    }
    if (fallback) {
        std::vector<double> dense(n * n, 0.0);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) dense[r * n + c] = a.at(r, c);
        return solve_dense(std::move(dense), std::vector<double>(rhs.begin(), rhs.end()));
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = y[i];
        const std::size_t col_end = std::min(n, i + a.upper() + 1);
        for (std::size_t c = i + 1; c < col_end; ++c) s -= lu.at(i, c) * x[c];
        x[i] = s / lu.at(i, i);
    }
    return x;
}

}  // namespace maxq
