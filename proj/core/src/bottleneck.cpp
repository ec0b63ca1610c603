#include "topogen/bottleneck.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "topogen/error.hpp"

namespace topogen {

namespace {

struct Pt {
    double birth, death;

    double to_diag() const { return (death - birth) / 2.0; }
};

double linf(const Pt& a, const Pt& b) {
    return std::max(std::abs(a.birth - b.birth), std::abs(a.death - b.death));
}

void split_bars(const std::vector<Bar>& bars, std::vector<Pt>& finite, std::vector<double>& inf_births) {
    for (const Bar& b : bars) {
        if (b.essential())
            inf_births.push_back(b.birth);
        else
            finite.push_back({b.birth, b.death});
    }
}

// Hopcroft-Karp maximum matching. Left vertices 0..nl-1, adjacency by
// right-vertex index.
struct Matching {
    int nl, nr;
    std::vector<std::vector<int>> adj;
    std::vector<int> match_l, match_r, layer;

    Matching(int nl_, int nr_) : nl(nl_), nr(nr_), adj(nl_) {}

    bool bfs() {
        std::queue<int> q;
        layer.assign(nl, -1);
        for (int u = 0; u < nl; ++u)
            if (match_l[u] < 0) {
                layer[u] = 0;
                q.push(u);
            }
        bool found = false;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int v : adj[u]) {
                int w = match_r[v];
                if (w < 0) {
                    found = true;
                } else if (layer[w] < 0) {
                    layer[w] = layer[u] + 1;
                    q.push(w);
                }
            }
        }
        return found;
    }

    bool dfs(int u) {
        for (int v : adj[u]) {
            int w = match_r[v];
            if (w < 0 || (layer[w] == layer[u] + 1 && dfs(w))) {
                match_l[u] = v;
                match_r[v] = u;
                return true;
            }
        }
        layer[u] = -1;
        return false;
    }

    int solve() {
        match_l.assign(nl, -1);
        match_r.assign(nr, -1);
        int size = 0;
        while (bfs())
            for (int u = 0; u < nl; ++u)
                if (match_l[u] < 0 && dfs(u)) ++size;
        return size;
    }
};

// Perfect-matching feasibility at radius r on the doubled bipartite
// graph: left = A plus diagonal copies of B, right = B plus diagonal
// copies of A. Diagonal copies match each other freely, so surplus
// points only pay their own diagonal distance.
bool feasible(const std::vector<Pt>& a, const std::vector<Pt>& b, double r) {
    int na = static_cast<int>(a.size()), nb = static_cast<int>(b.size());
    Matching m(na + nb, nb + na);
    for (int i = 0; i < na; ++i) {
        for (int j = 0; j < nb; ++j)
            if (linf(a[i], b[j]) <= r) m.adj[i].push_back(j);
        if (a[i].to_diag() <= r) m.adj[i].push_back(nb + i);
    }
    for (int j = 0; j < nb; ++j) {
        if (b[j].to_diag() <= r) m.adj[na + j].push_back(j);
        for (int i = 0; i < na; ++i) m.adj[na + j].push_back(nb + i);
    }
    return m.solve() == na + nb;
}

double finite_part(const std::vector<Pt>& a, const std::vector<Pt>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::vector<double> cand;
    cand.reserve(a.size() * b.size() + a.size() + b.size() + 1);
    cand.push_back(0.0);
    for (const Pt& p : a) cand.push_back(p.to_diag());
    for (const Pt& p : b) cand.push_back(p.to_diag());
    for (const Pt& p : a)
        for (const Pt& q : b) cand.push_back(linf(p, q));
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

    // smallest candidate radius admitting a perfect matching; the top
    // candidate (every point to its own diagonal or across) is always
    // feasible
    size_t lo = 0, hi = cand.size() - 1;
    while (lo < hi) {
        size_t mid = (lo + hi) / 2;
        if (feasible(a, b, cand[mid]))
            hi = mid;
        else
            lo = mid + 1;
    }
    return cand[lo];
}

double essential_part(std::vector<double> ia, std::vector<double> ib) {
    if (ia.size() != ib.size()) return kInf;
    std::sort(ia.begin(), ia.end());
    std::sort(ib.begin(), ib.end());
    double worst = 0.0;
    for (size_t i = 0; i < ia.size(); ++i) worst = std::max(worst, std::abs(ia[i] - ib[i]));
    return worst;
}

} // namespace

double bottleneck_distance(const std::vector<Bar>& a, const std::vector<Bar>& b) {
    std::vector<Pt> fa, fb;
    std::vector<double> ia, ib;
    split_bars(a, fa, ia);
    split_bars(b, fb, ib);
    double ess = essential_part(std::move(ia), std::move(ib));
    if (ess == kInf) return kInf;
    return std::max(ess, finite_part(fa, fb));
}

double bottleneck_distance(const PersistenceDiagram& a, const PersistenceDiagram& b, int dim) {
    if (dim < 0 || dim > 1) throw InputError("bottleneck dimension must be 0 or 1");
    return bottleneck_distance(a.h[dim], b.h[dim]);
}

namespace {

// Exhaustive minimum over assignments of every A point to an unused B
// point or the diagonal; B points left over go to the diagonal.
double brute(const std::vector<Pt>& a, const std::vector<Pt>& b, size_t i, uint32_t used) {
    if (i == a.size()) {
        double worst = 0.0;
        for (size_t j = 0; j < b.size(); ++j)
            if (!(used & (1u << j))) worst = std::max(worst, b[j].to_diag());
        return worst;
    }
    double best = std::max(a[i].to_diag(), brute(a, b, i + 1, used));
    for (size_t j = 0; j < b.size(); ++j) {
        if (used & (1u << j)) continue;
        double rest = brute(a, b, i + 1, used | (1u << j));
        best = std::min(best, std::max(linf(a[i], b[j]), rest));
    }
    return best;
}

} // namespace

double bottleneck_bruteforce(const std::vector<Bar>& a, const std::vector<Bar>& b) {
    std::vector<Pt> fa, fb;
    std::vector<double> ia, ib;
    split_bars(a, fa, ia);
    split_bars(b, fb, ib);
    if (fa.size() > 7 || fb.size() > 7)
        throw InputError("bottleneck_bruteforce is limited to 7 finite bars per diagram");
    double ess = essential_part(std::move(ia), std::move(ib));
    if (ess == kInf) return kInf;
    return std::max(ess, brute(fa, fb, 0, 0));
}

double bottleneck_bruteforce(const PersistenceDiagram& a, const PersistenceDiagram& b, int dim) {
    if (dim < 0 || dim > 1) throw InputError("bottleneck dimension must be 0 or 1");
    return bottleneck_bruteforce(a.h[dim], b.h[dim]);
}

} // namespace topogen
