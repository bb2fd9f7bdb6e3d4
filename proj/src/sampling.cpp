#include "mtk/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mtk/error.hpp"

namespace mtk {

DatasetWeights::DatasetWeights(std::vector<Entry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw ContractError("dataset weights are empty");
  for (const auto& [id, w] : entries_)
    if (!(w >= 0.0) || !std::isfinite(w)) throw ContractError("weight of '" + id + "' is negative");
  if (std::abs(sum() - 1.0) > 1e-9) throw ContractError("dataset weights must sum to 1");
}

bool DatasetWeights::contains(const std::string& id) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.first == id; });
}

double DatasetWeights::at(const std::string& id) const {
  for (const auto& [name, w] : entries_)
    if (name == id) return w;
  throw ContractError("unknown dataset '" + id + "'");
}

double DatasetWeights::sum() const {
  double s = 0.0;
  for (const auto& e : entries_) s += e.second;
  return s;
}

DatasetWeights temperature_weights(const std::vector<std::pair<std::string, double>>& sizes,
                                   double temperature) {
  if (sizes.empty()) throw ContractError("no dataset sizes given");
  if (!(temperature > 0.0)) throw ContractError("temperature must be positive");
  double total = 0.0;
  for (const auto& [id, n] : sizes) {
    if (!(n > 0.0)) throw ContractError("size of '" + id + "' must be positive");
    total += n;
  }
  std::vector<DatasetWeights::Entry> out;
  double norm = 0.0;
  for (const auto& [id, n] : sizes) {
    const double w = std::pow(n / total, 1.0 / temperature);
    out.emplace_back(id, w);
    norm += w;
  }
  for (auto& e : out) e.second /= norm;
  return DatasetWeights(std::move(out));
}

DatasetWeights rebalance_step(const DatasetWeights& weights, const std::string& overfitting,
                              double fraction) {
  if (weights.size() < 2) throw ContractError("rebalancing needs at least two datasets");
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ContractError("fraction must be in [0, 1]");
  const double moved = weights.at(overfitting) * fraction;
  const double share = moved / static_cast<double>(weights.size() - 1);
  std::vector<DatasetWeights::Entry> out = weights.entries();
  for (auto& [id, w] : out) w = id == overfitting ? w - moved : w + share;
  return DatasetWeights(std::move(out));
}

DatasetWeights default_rebalanced_weights() {
  return DatasetWeights({{"Slakh", 0.295},
                         {"MusicNet (em)", 0.19},
                         {"MIR-ST500", 0.191},
                         {"ENSTdrums", 0.05},
                         {"GuitarSet", 0.01},
                         {"EGMD", 0.004},
                         {"URMP", 0.1},
                         {"Maestro", 0.1},
                         {"SMT Bass", 0.01},
                         {"CMedia", 0.05}});
}

WeightedSampler::WeightedSampler(const DatasetWeights& weights, std::uint64_t seed) : rng_(seed) {
  double acc = 0.0;
  for (const auto& e : weights.entries()) {
    acc += e.second;
    cumulative_.push_back(acc);
  }
  if (cumulative_.empty()) throw ContractError("sampler needs at least one dataset");
}

std::size_t WeightedSampler::next() {
  const double u = rng_.uniform() * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return std::min(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
}

}  // namespace mtk
