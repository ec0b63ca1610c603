#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "topogen/pointcloud.hpp"

namespace topogen {

// One simplex of dimension 0, 1 or 2. Vertices are point indices in
// strictly increasing order; unused slots hold -1. Vertices enter at
// value 0, edges at their length, triangles at their longest edge.
struct Simplex {
    std::array<int32_t, 3> v{-1, -1, -1};
    int8_t dim = 0;
    double value = 0.0;
};

// Simplices sorted by (value, dim, vertex tuple). A face never has a
// larger value than its cofaces and ties resolve by dimension, so the
// sort places every face strictly before every coface and the sequence
// realizes the nested filtration.
struct FilteredComplex {
    std::vector<Simplex> simplices;
    int vertex_count = 0;
    int max_dim = 0;
    double max_scale = 0.0;

    size_t size() const { return simplices.size(); }
    std::array<size_t, 3> count_by_dim() const;
};

// Vietoris-Rips filtration: every vertex, every edge {i,j} with
// d(i,j) <= max_scale, and for max_dim = 2 every triangle whose three
// edges all qualify. Triangles come from intersecting sorted neighbor
// lists of each edge's endpoints, not an all-triples scan. Throws
// InputError for max_scale <= 0 or max_dim outside {1, 2}.
FilteredComplex build_vietoris_rips(const DistanceMatrix& dist, double max_scale, int max_dim);

// Largest entry of the matrix, the default scale cap.
double max_pairwise_distance(const DistanceMatrix& dist);

// Debug dump, one simplex per line "value dim v0 v1 v2" with fixed
// precision, in filtration order. Oracle tests compare these dumps.
std::string dump_complex(const FilteredComplex& f);

} // namespace topogen
