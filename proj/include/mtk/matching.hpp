#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace mtk {

/// Maximum-cardinality matching of a bipartite graph given as adjacency
/// lists from left vertices to right vertices (Hopcroft-Karp).
/// Returns (left, right) pairs sorted by left index.
std::vector<std::pair<std::size_t, std::size_t>> maximum_bipartite_matching(
    const std::vector<std::vector<std::size_t>>& adjacency, std::size_t right_count);

}  // namespace mtk
