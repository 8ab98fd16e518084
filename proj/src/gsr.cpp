#include "gsrcpd/gsr.hpp"

#include <string>

namespace gsrcpd {

double t_mu(double whole, double first, double second) {
    const double halves = first + second;
    if (!(halves > 0.0)) {
        throw DegenerateWindow("t_mu: both halves span zero distance");
    }
    return whole / halves;
}

double t_sigma(double first, double second) {
    if (!(first > 0.0) || !(second > 0.0)) {
        throw DegenerateWindow("t_sigma: a half spans zero distance");
    }
    return first / second + second / first;
}

SplitStatistics split_statistics(const SpanningDistances& spans, std::size_t split_index) {
    SplitStatistics stats;
    stats.t_sigma = t_sigma(spans.first, spans.second);
    stats.t_mu = t_mu(spans.whole, spans.first, spans.second);
    stats.split_index = split_index;
    return stats;
}

SplitStatistics scan_statistics(Block block, GraphKind kind) {
    if (block.size() % 2 != 0 || block.size() < 4) {
        throw InvalidArgument("scan_statistics: block length must be even and >= 4, got " +
                              std::to_string(block.size()));
    }
    const std::size_t split = block.size() / 2;
    return split_statistics(build_window_graphs(block, split, kind), split);
}

}  // namespace gsrcpd
