#pragma once

#include <cstddef>
#include <limits>
#include <tuple>
#include <vector>

#include "gsrcpd/core.hpp"

namespace gsrcpd {

struct Edge {
    std::size_t i = 0;  // i < j
    std::size_t j = 0;
    double weight = 0.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Weighted undirected graph over a block, edge weights ||y_i - y_j||^2.
struct WindowGraph {
    GraphKind kind = GraphKind::Complete;
    std::size_t node_count = 0;
    std::vector<Edge> edges;
    double spanning_distance = 0.0;
};

struct MstResult {
    double weight = 0.0;
    std::vector<Edge> edges;
};

/// Spanning distances of a window and its two sides.
struct SpanningDistances {
    double whole = 0.0;
    double first = 0.0;
    double second = 0.0;
};

double squared_distance(const Observation& a, const Observation& b);

/// Sum over unordered pairs i<j of ||y_i - y_j||^2 in O(m d), via
/// m * sum ||y_i - c||^2 - ||sum (y_i - c)||^2 with c the block mean.
/// Centering leaves the value unchanged and avoids cancellation under large offsets.
double complete_spanning_distance(Block block);

/// Same quantity by explicit enumeration of all pairs, O(m^2 d).
double complete_spanning_distance_pairwise(Block block);

MstResult mst_spanning_distance(Block block);

WindowGraph build_complete_graph(Block block);
WindowGraph build_mst_graph(Block block);

/// dG over the whole block, dG1 over [0, split), dG2 over [split, m).
SpanningDistances build_window_graphs(Block block, std::size_t split, GraphKind kind);

/// Dense symmetric matrix of squared distances.
class DistanceMatrix {
public:
    explicit DistanceMatrix(Block block);

    std::size_t size() const noexcept { return size_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * size_ + j]; }

private:
    std::size_t size_ = 0;
    std::vector<double> data_;
};

/// Dense Prim over `m` nodes with distances supplied by `dist(i, j)`.
///
/// Runs in O(m^2) time with O(m) scratch. Ties between equal-weight candidate
/// edges go to the lexicographically smaller (min, max) index pair, so the
/// edge set is deterministic. Edges are appended to `edges` when non-null.
template <typename Distance>
double prim_mst(std::size_t m, Distance&& dist, std::vector<Edge>* edges = nullptr) {
    if (m < 2) return 0.0;
    constexpr double inf = std::numeric_limits<double>::infinity();
    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();

    std::vector<double> key(m, inf);
    std::vector<std::size_t> parent(m, none);
    std::vector<char> in_tree(m, 0);

    auto edge_key = [](std::size_t a, std::size_t b) {
        return a < b ? std::tuple{a, b} : std::tuple{b, a};
    };

    in_tree[0] = 1;
    for (std::size_t v = 1; v < m; ++v) {
        key[v] = dist(0, v);
        parent[v] = 0;
    }

    double total = 0.0;
    for (std::size_t added = 1; added < m; ++added) {
        std::size_t best = none;
        for (std::size_t v = 0; v < m; ++v) {
            if (in_tree[v]) continue;
            if (best == none || key[v] < key[best] ||
                (key[v] == key[best] && edge_key(parent[v], v) < edge_key(parent[best], best))) {
                best = v;
            }
        }
        in_tree[best] = 1;
        total += key[best];
        if (edges) {
            const auto [a, b] = edge_key(parent[best], best);
            edges->push_back(Edge{a, b, key[best]});
        }
        for (std::size_t v = 0; v < m; ++v) {
            if (in_tree[v]) continue;
            const double w = dist(best, v);
            if (w < key[v] || (w == key[v] && edge_key(best, v) < edge_key(parent[v], v))) {
                key[v] = w;
                parent[v] = best;
            }
        }
    }
    return total;
}

/// MST spanning distances of a window of `m` nodes split at `split`,
/// with distances supplied by `dist(i, j)` for window-local indices.
template <typename Distance>
SpanningDistances mst_window_distances(std::size_t m, std::size_t split, Distance&& dist) {
    SpanningDistances out;
    out.whole = prim_mst(m, dist);
    out.first = prim_mst(split, dist);
    out.second = prim_mst(m - split, [&](std::size_t a, std::size_t b) {
        return dist(a + split, b + split);
    });
    return out;
}

}  // namespace gsrcpd
