#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace maxq {

/// Square band matrix with `lower` sub-diagonals and `upper` super-diagonals,
/// stored row-wise as n x (lower + upper + 1).
class BandMatrix {
public:
    BandMatrix(std::size_t n, std::size_t lower, std::size_t upper);

    std::size_t size() const { return n_; }
    std::size_t lower() const { return lower_; }
    std::size_t upper() const { return upper_; }

    bool in_band(std::size_t row, std::size_t col) const {
        return col + lower_ >= row && col <= row + upper_;
    }
    double& at(std::size_t row, std::size_t col);
    double at(std::size_t row, std::size_t col) const;

private:
    std::size_t n_;
    std::size_t lower_;
    std::size_t upper_;
    std::vector<double> data_;
};

/// Solves A x = rhs. Banded LU without pivoting; if a pivot falls below
/// 1e-14 in magnitude the original system is re-solved densely with partial
/// pivoting. Throws NumericFailure when the matrix is singular.
std::vector<double> solve_banded(const BandMatrix& a, std::span<const double> rhs);

/// Dense Gaussian elimination with partial pivoting (row-major n x n).
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> rhs);

}  // namespace maxq
