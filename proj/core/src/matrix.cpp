#include "topogen/matrix.hpp"

#include "topogen/error.hpp"

namespace topogen {

Matrix matmul(const Matrix& a, const Matrix& b, bool trans_a, bool trans_b) {
    if (trans_a && trans_b) throw InputError("matmul: transposing both operands is not supported");
    int m = trans_a ? a.cols() : a.rows();
    int k = trans_a ? a.rows() : a.cols();
    int kb = trans_b ? b.cols() : b.rows();
    int n = trans_b ? b.rows() : b.cols();
    if (k != kb) throw InputError("matmul: inner dimensions disagree");

    Matrix c(m, n);
    if (!trans_a && !trans_b) {
        for (int i = 0; i < m; ++i)
            for (int p = 0; p < k; ++p) {
                double aip = a(i, p);
                for (int j = 0; j < n; ++j) c(i, j) += aip * b(p, j);
            }
    } else if (trans_a) {
        for (int i = 0; i < m; ++i)
            for (int p = 0; p < k; ++p) {
                double aip = a(p, i);
                for (int j = 0; j < n; ++j) c(i, j) += aip * b(p, j);
            }
    } else {
        // b used transposed: c(i, j) is the dot product of row i of a
        // with row j of b, both contiguous
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int p = 0; p < k; ++p) s += a(i, p) * b(j, p);
                c(i, j) = s;
            }
    }
    return c;
}

Matrix transposed(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
    return t;
}

} // namespace topogen
