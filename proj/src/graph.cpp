#include "gsrcpd/graph.hpp"

#include <string>

namespace gsrcpd {

namespace {

void require_nodes(Block block, std::size_t minimum, const char* what) {
    if (block.size() < minimum) {
        throw InvalidArgument(std::string(what) + " needs at least " + std::to_string(minimum) +
                              " observations, got " + std::to_string(block.size()));
    }
}

}  // namespace

double squared_distance(const Observation& a, const Observation& b) {
    if (a.dimension() != b.dimension()) {
        throw DimensionMismatch("squared_distance: dimensions " + std::to_string(a.dimension()) +
                                " and " + std::to_string(b.dimension()) + " differ");
    }
    double sum = 0.0;
    const auto x = a.values();
    const auto y = b.values();
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double diff = x[k] - y[k];
        sum += diff * diff;
    }
    return sum;
}

double complete_spanning_distance(Block block) {
    require_nodes(block, 2, "complete_spanning_distance");
    const std::size_t d = block.front().dimension();
    require_dimension(block, d);
    const auto m = static_cast<double>(block.size());

    std::vector<double> mean(d, 0.0);
    for (const auto& y : block) {
        for (std::size_t k = 0; k < d; ++k) mean[k] += y[k];
    }
    for (auto& v : mean) v /= m;

    double sum_sq = 0.0;
    std::vector<double> sum(d, 0.0);
    for (const auto& y : block) {
        for (std::size_t k = 0; k < d; ++k) {
            const double c = y[k] - mean[k];
            sum_sq += c * c;
            sum[k] += c;
        }
    }
    double sum_norm = 0.0;
    for (const auto v : sum) sum_norm += v * v;
    const double value = m * sum_sq - sum_norm;
    return value > 0.0 ? value : 0.0;
}

double complete_spanning_distance_pairwise(Block block) {
    require_nodes(block, 2, "complete_spanning_distance_pairwise");
    double total = 0.0;
    for (std::size_t i = 0; i < block.size(); ++i) {
        for (std::size_t j = i + 1; j < block.size(); ++j) {
            total += squared_distance(block[i], block[j]);
        }
    }
    return total;
}

MstResult mst_spanning_distance(Block block) {
    require_nodes(block, 2, "mst_spanning_distance");
    require_dimension(block, block.front().dimension());
    const DistanceMatrix dist(block);
    MstResult result;
    result.edges.reserve(block.size() - 1);
    result.weight = prim_mst(block.size(), dist, &result.edges);
    return result;
}

WindowGraph build_complete_graph(Block block) {
    require_nodes(block, 2, "build_complete_graph");
    require_dimension(block, block.front().dimension());
    WindowGraph graph;
    graph.kind = GraphKind::Complete;
    graph.node_count = block.size();
    graph.edges.reserve(block.size() * (block.size() - 1) / 2);
    for (std::size_t i = 0; i < block.size(); ++i) {
        for (std::size_t j = i + 1; j < block.size(); ++j) {
            const double w = squared_distance(block[i], block[j]);
            graph.edges.push_back(Edge{i, j, w});
            graph.spanning_distance += w;
        }
    }
    return graph;
}

WindowGraph build_mst_graph(Block block) {
    auto mst = mst_spanning_distance(block);
    WindowGraph graph;
    graph.kind = GraphKind::Mst;
    graph.node_count = block.size();
    graph.edges = std::move(mst.edges);
    graph.spanning_distance = mst.weight;
    return graph;
}

SpanningDistances build_window_graphs(Block block, std::size_t split, GraphKind kind) {
    if (split < 2 || block.size() < split + 2) {
        throw InvalidArgument("build_window_graphs: each side needs at least 2 observations (block " +
                              std::to_string(block.size()) + ", split " + std::to_string(split) + ")");
    }
    if (kind == GraphKind::Complete) {
        return SpanningDistances{complete_spanning_distance(block),
                                 complete_spanning_distance(block.first(split)),
                                 complete_spanning_distance(block.subspan(split))};
    }
    require_dimension(block, block.front().dimension());
    const DistanceMatrix dist(block);
    return mst_window_distances(block.size(), split, dist);
}

DistanceMatrix::DistanceMatrix(Block block) : size_(block.size()), data_(block.size() * block.size(), 0.0) {
    for (std::size_t i = 0; i < size_; ++i) {
        for (std::size_t j = i + 1; j < size_; ++j) {
            const double w = squared_distance(block[i], block[j]);
            data_[i * size_ + j] = w;
            data_[j * size_ + i] = w;
        }
    }
}

}  // namespace gsrcpd
