#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "topogen/rips.hpp"

namespace topogen {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// One (birth, death) interval. death == kInf marks an essential class
// that survives to the end of the filtration. The simplex indices
// record which filtration positions created and killed the class; they
// are provenance, not value, so equality ignores them (-1 when unknown,
// e.g. after a CSV round trip).
struct Bar {
    double birth = 0.0;
    double death = 0.0;
    int32_t birth_index = -1;
    int32_t death_index = -1;

    double persistence() const { return death - birth; }
    bool essential() const { return death == kInf; }

    friend bool operator==(const Bar& a, const Bar& b) {
        return a.birth == b.birth && a.death == b.death;
    }
};

// Persistence diagram over Z/2 for homology dimensions 0 and 1. Bars
// within a dimension are sorted by (birth, death). Zero-persistence
// pairs are dropped from the bars but tallied, and essential counts by
// simplex dimension are kept so Euler bookkeeping stays checkable;
// essential_by_dim[2] counts classes a dim-2 filtration cannot kill (no
// bars are emitted for them).
struct PersistenceDiagram {
    std::vector<Bar> h[2];
    size_t dropped_zero_pairs = 0;
    std::array<size_t, 3> essential_by_dim{0, 0, 0};

    const std::vector<Bar>& dim(int d) const { return h[d]; }
    std::vector<Bar>& dim(int d) { return h[d]; }
};

// Persistent homology by column reduction of the Z/2 boundary matrix in
// filtration order: each column is reduced by adding earlier columns
// sharing its lowest nonzero row; a column emptying marks a positive
// simplex, otherwise low(j) = i pairs birth simplex i with death
// simplex j. Positives never claimed as births become essential. With
// max_dim 1 there are no triangles, so every H1 class is essential.
// Throws InputError on a malformed complex (missing face, bad order).
PersistenceDiagram compute_persistence(const FilteredComplex& f);

// Independent H0 computation: sort edges by weight and merge components
// in order; each merge closes a bar (0, weight), each surviving
// component yields an essential bar. Used as an oracle against
// compute_persistence. Zero-weight merges are dropped and tallied like
// zero-persistence pairs.
PersistenceDiagram h0_via_union_find(const DistanceMatrix& dist, double max_scale);

// One barcode interval; essential bars are clipped to the cap and
// flagged instead of carrying an infinite endpoint.
struct BarcodeBar {
    int dim = 0;
    double birth = 0.0;
    double death = 0.0;
    bool clipped = false;
};

// Intervals of both dimensions sorted by (dim, birth, death), infinite
// deaths clipped to scale_cap. Throws InputError if scale_cap is below
// some finite death.
std::vector<BarcodeBar> barcodes(const PersistenceDiagram& d, double scale_cap);

// Diagram CSV: header "dim,birth,death", one row per bar in barcodes()
// order, death written as "inf" for essential bars, values in %.6g.
void save_diagram_csv(const PersistenceDiagram& d, const std::string& path);
PersistenceDiagram load_diagram_csv(const std::string& path);

} // namespace topogen
