#include "mtk/matching.hpp"

#include <limits>
#include <queue>

namespace mtk {
namespace {

constexpr std::size_t kNil = std::numeric_limits<std::size_t>::max();
constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();

class HopcroftKarp {
 public:
  HopcroftKarp(const std::vector<std::vector<std::size_t>>& adj, std::size_t right_count)
      : adj_(adj),
        match_left_(adj.size(), kNil),
        match_right_(right_count, kNil),
        dist_(adj.size(), kInf) {}

  void run() {
    while (bfs())
      for (std::size_t u = 0; u < adj_.size(); ++u)
        if (match_left_[u] == kNil) dfs(u);
  }

  const std::vector<std::size_t>& match_left() const { return match_left_; }

 private:
  // Layers free left vertices at distance 0; true if an augmenting path exists.
  bool bfs() {
    std::queue<std::size_t> q;
    for (std::size_t u = 0; u < adj_.size(); ++u) {
      if (match_left_[u] == kNil) {
        dist_[u] = 0;
        q.push(u);
      } else {
        dist_[u] = kInf;
      }
    }
    bool found = false;
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop();
      for (std::size_t v : adj_[u]) {
        const std::size_t w = match_right_[v];
        if (w == kNil) {
          found = true;
        } else if (dist_[w] == kInf) {
          dist_[w] = dist_[u] + 1;
          q.push(w);
        }
      }
    }
    return found;
  }

  bool dfs(std::size_t u) {
    for (std::size_t v : adj_[u]) {
      const std::size_t w = match_right_[v];
      if (w == kNil || (dist_[w] == dist_[u] + 1 && dfs(w))) {
        match_left_[u] = v;
        match_right_[v] = u;
        return true;
      }
    }
    dist_[u] = kInf;
    return false;
  }

  const std::vector<std::vector<std::size_t>>& adj_;
  std::vector<std::size_t> match_left_;
  std::vector<std::size_t> match_right_;
  std::vector<std::size_t> dist_;
};

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> maximum_bipartite_matching(
    const std::vector<std::vector<std::size_t>>& adjacency, std::size_t right_count) {
  HopcroftKarp hk(adjacency, right_count);
  hk.run();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t u = 0; u < adjacency.size(); ++u)
    if (hk.match_left()[u] != kNil) pairs.emplace_back(u, hk.match_left()[u]);
  return pairs;
}

}  // namespace mtk
