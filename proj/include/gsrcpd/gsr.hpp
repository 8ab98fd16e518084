#pragma once

#include "gsrcpd/core.hpp"
#include "gsrcpd/graph.hpp"

namespace gsrcpd {

// Graph spanning ratio for the mean: dG / (dG1 + dG2).
// Throws DegenerateWindow when dG1 + dG2 == 0.
double t_mu(double whole, double first, double second);

// Graph spanning ratio for the variance: dG1/dG2 + dG2/dG1 (>= 2).
// Throws DegenerateWindow when either side spans zero distance.
double t_sigma(double first, double second);

// Both statistics from precomputed spanning distances.
SplitStatistics split_statistics(const SpanningDistances& spans, std::size_t split_index);

// Both statistics for an even-length block split at its midpoint.
SplitStatistics scan_statistics(Block block, GraphKind kind);

}  // namespace gsrcpd
