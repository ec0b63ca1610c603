#include "topogen/rips.hpp"

#include <algorithm>
#include <cstdio>
#include <tuple>

#include "topogen/error.hpp"

namespace topogen {

std::array<size_t, 3> FilteredComplex::count_by_dim() const {
    std::array<size_t, 3> counts{0, 0, 0};
    for (const Simplex& s : simplices) ++counts[s.dim];
    return counts;
}

FilteredComplex build_vietoris_rips(const DistanceMatrix& dist, double max_scale, int max_dim) {
    if (max_dim != 1 && max_dim != 2)
        throw InputError("Rips max_dim must be 1 or 2, got " + std::to_string(max_dim));
    if (!(max_scale > 0.0))
        throw InputError("Rips max_scale must be positive");
    int n = dist.size();
    if (n < 1) throw InputError("Rips needs at least one point");

    FilteredComplex f;
    f.vertex_count = n;
    f.max_dim = max_dim;
    f.max_scale = max_scale;

    for (int i = 0; i < n; ++i) {
        Simplex s;
        s.v = {i, -1, -1};
        s.dim = 0;
        s.value = 0.0;
        f.simplices.push_back(s);
    }

    // sorted adjacency restricted to the scale cap, shared by edge
    // emission and triangle enumeration
    std::vector<std::vector<int32_t>> nbr(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (dist(i, j) <= max_scale) {
                nbr[i].push_back(j);
                nbr[j].push_back(i);
            }

    for (int i = 0; i < n; ++i)
        for (int32_t j : nbr[i]) {
            if (j < i) continue;
            Simplex s;
            s.v = {i, j, -1};
            s.dim = 1;
            s.value = dist(i, j);
            f.simplices.push_back(s);
        }

    if (max_dim == 2) {
        // each triangle i<j<k found once, as a common neighbor k>j of
        // the edge (i, j)
        for (int i = 0; i < n; ++i)
            for (int32_t j : nbr[i]) {
                if (j < i) continue;
                auto ai = std::upper_bound(nbr[i].begin(), nbr[i].end(), j);
                auto aj = std::upper_bound(nbr[j].begin(), nbr[j].end(), j);
                while (ai != nbr[i].end() && aj != nbr[j].end()) {
                    if (*ai < *aj) {
                        ++ai;
                    } else if (*aj < *ai) {
                        ++aj;
                    } else {
                        int32_t k = *ai;
                        Simplex s;
                        s.v = {i, j, k};
                        s.dim = 2;
                        s.value = std::max({dist(i, j), dist(i, k), dist(j, k)});
                        f.simplices.push_back(s);
                        ++ai;
                        ++aj;
                    }
                }
            }
    }

    std::sort(f.simplices.begin(), f.simplices.end(), [](const Simplex& a, const Simplex& b) {
        return std::tie(a.value, a.dim, a.v) < std::tie(b.value, b.dim, b.v);
    });
    return f;
}

double max_pairwise_distance(const DistanceMatrix& dist) {
    double m = 0.0;
    int n = dist.size();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) m = std::max(m, dist(i, j));
    return m;
}

std::string dump_complex(const FilteredComplex& f) {
    std::string out;
    char buf[96];
    for (const Simplex& s : f.simplices) {
        int len = std::snprintf(buf, sizeof buf, "%.12g %d %d %d %d\n", s.value, int(s.dim),
                                int(s.v[0]), int(s.v[1]), int(s.v[2]));
        out.append(buf, len);
    }
    return out;
}

} // namespace topogen
