#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mtk/random.hpp"

namespace mtk {

/// Dataset sampling distribution. Entry order is preserved.
class DatasetWeights {
 public:
  using Entry = std::pair<std::string, double>;

  DatasetWeights() = default;
  /// Validates non-negativity and a unit sum within 1e-9.
  explicit DatasetWeights(std::vector<Entry> entries);

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool contains(const std::string& id) const;
  /// Throws ContractError for an unknown dataset.
  double at(const std::string& id) const;
  double sum() const;

 private:
  std::vector<Entry> entries_;
};

/// theta(l) proportional to (n(l) / n_total)^(1 / c).
DatasetWeights temperature_weights(const std::vector<std::pair<std::string, double>>& sizes,
                                   double temperature);

/// Moves `fraction` of the over-fitting dataset's weight, split evenly, onto
/// the other datasets.
DatasetWeights rebalance_step(const DatasetWeights& weights, const std::string& overfitting,
                              double fraction = 0.10);

/// The hand-tuned re-balanced multi-dataset sampling table.
DatasetWeights default_rebalanced_weights();

class WeightedSampler {
 public:
  WeightedSampler(const DatasetWeights& weights, std::uint64_t seed);
  /// Index into weights.entries().
  std::size_t next();

 private:
  std::vector<double> cumulative_;
  Rng rng_;
};

}  // namespace mtk
