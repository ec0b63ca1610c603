#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace topogen {

// Dense row-major matrix of 64-bit reals. All numeric kernels in this
// project run through this type; arithmetic order is fixed so results
// are reproducible run to run.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), v_(static_cast<size_t>(rows) * cols, fill) {
        assert(rows >= 0 && cols >= 0);
    }
    Matrix(int rows, int cols, std::vector<double> data)
        : rows_(rows), cols_(cols), v_(std::move(data)) {
        assert(v_.size() == static_cast<size_t>(rows) * cols);
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    size_t size() const { return v_.size(); }
    bool empty() const { return v_.empty(); }

    double& operator()(int r, int c) { return v_[static_cast<size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return v_[static_cast<size_t>(r) * cols_ + c]; }

    std::span<double> data() { return v_; }
    std::span<const double> data() const { return v_; }
    std::span<double> row(int r) { return {v_.data() + static_cast<size_t>(r) * cols_, static_cast<size_t>(cols_)}; }
    std::span<const double> row(int r) const {
        return {v_.data() + static_cast<size_t>(r) * cols_, static_cast<size_t>(cols_)};
    }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    bool all_finite() const {
        for (double x : v_)
            if (!std::isfinite(x)) return false;
        return true;
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.v_ == b.v_;
    }

private:
    int rows_ = 0, cols_ = 0;
    std::vector<double> v_;
};

// c = op(a) * op(b), accumulating in the ikj order so the inner loop is
// contiguous in both b and c.
Matrix matmul(const Matrix& a, const Matrix& b, bool trans_a = false, bool trans_b = false);

Matrix transposed(const Matrix& m);

} // namespace topogen
