#pragma once

#include <vector>

#include "topogen/persistence.hpp"

namespace topogen {

// Exact bottleneck distance between the dimension-dim bars of two
// diagrams. Finite bars: binary search over the sorted candidate radii
// (all cross L-inf distances plus every half persistence and 0), with a
// Hopcroft-Karp perfect-matching feasibility probe at each radius, so
// the result is always one of the candidates. Essential bars are
// matched separately by sorted births; a count mismatch makes the
// distance +infinity, otherwise the largest birth gap joins the max.
double bottleneck_distance(const PersistenceDiagram& a, const PersistenceDiagram& b, int dim);

// Same contract on raw bar lists (one dimension's bars).
double bottleneck_distance(const std::vector<Bar>& a, const std::vector<Bar>& b);

// Oracle: exhaustive minimum over all bijections of A union diagonal to
// B union diagonal. Throws InputError beyond 7 finite bars per side.
double bottleneck_bruteforce(const PersistenceDiagram& a, const PersistenceDiagram& b, int dim);
double bottleneck_bruteforce(const std::vector<Bar>& a, const std::vector<Bar>& b);

} // namespace topogen
