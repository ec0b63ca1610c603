#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "topogen/matrix.hpp"
#include "topogen/rng.hpp"

namespace topogen {

// A finite set of points in R^d stored as rows of a Matrix. Column
// names travel with the cloud so CSV round-trips keep the schema; a
// label column, when one was selected at load time, rides along as
// metadata and never enters the coordinates.
struct PointCloud {
    Matrix points; // n x d
    std::vector<std::string> columns; // d names, empty means unnamed
    std::vector<double> labels; // n values when a label column was chosen, else empty
    std::string label_name;

    int size() const { return points.rows(); }
    int dim() const { return points.cols(); }
};

// Pairwise Euclidean distances. Diagonal is exactly 0 and the matrix is
// symmetric by construction (each entry computed once and mirrored).
struct DistanceMatrix {
    Matrix d; // n x n

    int size() const { return d.rows(); }
    double operator()(int i, int j) const { return d(i, j); }
};

DistanceMatrix pairwise_distances(const PointCloud& pc);

// Parses a CSV whose first line is a header. feature_columns empty
// selects every column except the label column; otherwise names are
// matched against the header. Cells of selected columns must parse as
// finite reals. Errors (missing file, unknown column, non-numeric cell,
// ragged row, empty selection) throw InputError naming the row and
// column involved.
PointCloud load_csv(const std::string& path,
                    const std::vector<std::string>& feature_columns = {},
                    const std::string& label_column = "");

// Writes header then one point per line, coordinates in shortest
// round-trip decimal form so load_csv(save_csv(pc)) reproduces the
// values bit for bit. Labels are not written; clouds dump as pure
// coordinates.
void save_csv(const PointCloud& pc, const std::string& path);

// m rows drawn uniformly without replacement, in draw order,
// deterministic per seed. Throws InputError unless 1 <= m <= n.
PointCloud sample_batch(const PointCloud& pc, int m, uint64_t seed);
PointCloud sample_batch(const PointCloud& pc, int m, Rng& rng);

// Per-column affine map to empirical mean 0 and standard deviation 1
// (population convention, divide by n). Constant columns map to all
// zeros. Throws InputError for n < 2.
PointCloud standardize(const PointCloud& pc);

} // namespace topogen
