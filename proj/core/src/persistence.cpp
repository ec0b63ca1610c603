#include "topogen/persistence.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "topogen/error.hpp"

namespace topogen {

namespace {

bool bar_order(const Bar& a, const Bar& b) {
    if (a.birth != b.birth) return a.birth < b.birth;
    return a.death < b.death;
}

// Boundary columns as sorted filtration indices of the faces. Also
// validates the complex: faces must exist and precede their cofaces.
std::vector<std::vector<int32_t>> boundary_columns(const FilteredComplex& f) {
    size_t m = f.simplices.size();
    std::vector<int32_t> vert_pos(f.vertex_count, -1);
    std::unordered_map<int64_t, int32_t> edge_pos;
    edge_pos.reserve(m);
    auto edge_key = [&](int32_t a, int32_t b) {
        return static_cast<int64_t>(a) * f.vertex_count + b;
    };

    std::vector<std::vector<int32_t>> cols(m);
    double prev_value = 0.0;
    for (size_t j = 0; j < m; ++j) {
        const Simplex& s = f.simplices[j];
        if (s.value < prev_value) throw InputError("complex not sorted by filtration value");
        prev_value = s.value;
        switch (s.dim) {
        case 0:
            if (s.v[0] < 0 || s.v[0] >= f.vertex_count)
                throw InputError("vertex index out of range");
            vert_pos[s.v[0]] = static_cast<int32_t>(j);
            break;
        case 1: {
            int32_t pa = vert_pos[s.v[0]];
            int32_t pb = vert_pos[s.v[1]];
            if (pa < 0 || pb < 0) throw InputError("edge appears before one of its vertices");
            cols[j] = {std::min(pa, pb), std::max(pa, pb)};
            edge_pos[edge_key(s.v[0], s.v[1])] = static_cast<int32_t>(j);
            break;
        }
        case 2: {
            auto edge_at = [&](int32_t a, int32_t b) {
                auto it = edge_pos.find(edge_key(a, b));
                if (it == edge_pos.end())
                    throw InputError("triangle appears before one of its edges");
                return it->second;
            };
            cols[j] = {edge_at(s.v[0], s.v[1]), edge_at(s.v[0], s.v[2]),
                       edge_at(s.v[1], s.v[2])};
            std::sort(cols[j].begin(), cols[j].end());
            break;
        }
        default:
            throw InputError("simplex dimension out of range");
        }
    }
    return cols;
}

} // namespace

PersistenceDiagram compute_persistence(const FilteredComplex& f) {
    size_t m = f.simplices.size();
    std::vector<std::vector<int32_t>> cols = boundary_columns(f);

    PersistenceDiagram diag;
    std::vector<int32_t> low_inv(m, -1); // row -> column owning that low
    std::vector<char> positive(m, 0);
    std::vector<int32_t> scratch;

    for (size_t j = 0; j < m; ++j) {
        std::vector<int32_t>& col = cols[j];
        while (!col.empty()) {
            int32_t low = col.back();
            int32_t k = low_inv[low];
            if (k < 0) break;
            const std::vector<int32_t>& other = cols[k];
            scratch.clear();
            std::set_symmetric_difference(col.begin(), col.end(), other.begin(), other.end(),
                                          std::back_inserter(scratch));
            col.swap(scratch);
        }
        if (col.empty()) {
            positive[j] = 1;
            continue;
        }
        int32_t low = col.back();
        low_inv[low] = static_cast<int32_t>(j);
        double birth = f.simplices[low].value;
        double death = f.simplices[j].value;
        if (birth == death) {
            ++diag.dropped_zero_pairs;
            continue;
        }
        Bar bar;
        bar.birth = birth;
        bar.death = death;
        bar.birth_index = low;
        bar.death_index = static_cast<int32_t>(j);
        diag.h[f.simplices[low].dim].push_back(bar);
    }

    for (size_t j = 0; j < m; ++j) {
        if (!positive[j] || low_inv[j] >= 0) continue;
        int d = f.simplices[j].dim;
        ++diag.essential_by_dim[d];
        if (d <= 1) {
            Bar bar;
            bar.birth = f.simplices[j].value;
            bar.death = kInf;
            bar.birth_index = static_cast<int32_t>(j);
            diag.h[d].push_back(bar);
        }
    }

    std::sort(diag.h[0].begin(), diag.h[0].end(), bar_order);
    std::sort(diag.h[1].begin(), diag.h[1].end(), bar_order);
    return diag;
}

namespace {

struct UnionFind {
    std::vector<int32_t> parent;

    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

    int32_t find(int32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]]; // path halving
            x = parent[x];
        }
        return x;
    }
};

} // namespace

PersistenceDiagram h0_via_union_find(const DistanceMatrix& dist, double max_scale) {
    int n = dist.size();
    struct E {
        double w;
        int32_t a, b;
    };
    std::vector<E> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (dist(i, j) <= max_scale) edges.push_back({dist(i, j), i, j});
    std::sort(edges.begin(), edges.end(), [](const E& x, const E& y) {
        if (x.w != y.w) return x.w < y.w;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });

    PersistenceDiagram diag;
    UnionFind uf(n);
    int components = n;
    for (const E& e : edges) {
        int32_t ra = uf.find(e.a), rb = uf.find(e.b);
        if (ra == rb) continue;
        uf.parent[ra] = rb;
        --components;
        if (e.w == 0.0) {
            ++diag.dropped_zero_pairs;
        } else {
            Bar bar;
            bar.birth = 0.0;
            bar.death = e.w;
            diag.h[0].push_back(bar);
        }
    }
    for (int c = 0; c < components; ++c) {
        Bar bar;
        bar.birth = 0.0;
        bar.death = kInf;
        diag.h[0].push_back(bar);
    }
    diag.essential_by_dim[0] = static_cast<size_t>(components);
    std::sort(diag.h[0].begin(), diag.h[0].end(), bar_order);
    return diag;
}

std::vector<BarcodeBar> barcodes(const PersistenceDiagram& d, double scale_cap) {
    std::vector<BarcodeBar> out;
    for (int dim = 0; dim < 2; ++dim)
        for (const Bar& b : d.h[dim]) {
            if (!b.essential() && b.death > scale_cap)
                throw InputError("barcode scale cap below a finite death");
            BarcodeBar row;
            row.dim = dim;
            row.birth = b.birth;
            row.death = b.essential() ? scale_cap : b.death;
            row.clipped = b.essential();
            out.push_back(row);
        }
    return out;
}

namespace {

std::string format_g6(double x) {
    char buf[40];
    int len = std::snprintf(buf, sizeof buf, "%.6g", x);
    return std::string(buf, len);
}

} // namespace

void save_diagram_csv(const PersistenceDiagram& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write diagram file: " + path);
    out << "dim,birth,death\n";
    for (int dim = 0; dim < 2; ++dim)
        for (const Bar& b : d.h[dim]) {
            out << dim << ',' << format_g6(b.birth) << ',';
            if (b.essential())
                out << "inf";
            else
                out << format_g6(b.death);
            out << '\n';
        }
    if (!out) throw InputError("write failed: " + path);
}

PersistenceDiagram load_diagram_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open diagram file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw InputError(path + ": empty diagram file");

    PersistenceDiagram diag;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        auto bad = [&](const std::string& why) {
            return InputError(path + ":" + std::to_string(lineno) + ": " + why);
        };
        size_t c1 = line.find(',');
        size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos) throw bad("expected dim,birth,death");
        std::string dim_s = line.substr(0, c1);
        std::string birth_s = line.substr(c1 + 1, c2 - c1 - 1);
        std::string death_s = line.substr(c2 + 1);

        int dim;
        auto [p0, e0] = std::from_chars(dim_s.data(), dim_s.data() + dim_s.size(), dim);
        if (e0 != std::errc() || p0 != dim_s.data() + dim_s.size() || dim < 0 || dim > 1)
            throw bad("homology dimension must be 0 or 1: '" + dim_s + "'");

        Bar bar;
        auto [p1, e1] = std::from_chars(birth_s.data(), birth_s.data() + birth_s.size(), bar.birth);
        if (e1 != std::errc() || p1 != birth_s.data() + birth_s.size() || !std::isfinite(bar.birth))
            throw bad("bad birth value: '" + birth_s + "'");
        if (death_s == "inf") {
            bar.death = kInf;
        } else {
            auto [p2, e2] =
                std::from_chars(death_s.data(), death_s.data() + death_s.size(), bar.death);
            if (e2 != std::errc() || p2 != death_s.data() + death_s.size() ||
                !std::isfinite(bar.death))
                throw bad("bad death value: '" + death_s + "'");
        }
        if (bar.death < bar.birth) throw bad("death precedes birth");
        if (bar.essential()) ++diag.essential_by_dim[dim];
        diag.h[dim].push_back(bar);
    }
    std::sort(diag.h[0].begin(), diag.h[0].end(), bar_order);
    std::sort(diag.h[1].begin(), diag.h[1].end(), bar_order);
    return diag;
}

} // namespace topogen
