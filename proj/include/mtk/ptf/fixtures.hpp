#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mtk/ptf/types.hpp"

namespace mtk::ptf {

/// Flat little-endian f64 array with its shape. `<stem>.bin` holds the data
/// in row-major order and `<stem>.json` the manifest.
struct Fixture {
  std::vector<std::int64_t> shape;
  std::vector<double> data;
};

void write_fixture(const std::string& stem, const Fixture& f);
Fixture read_fixture(const std::string& stem);

Fixture to_fixture(const MatrixXd& m);
MatrixXd to_matrix(const Fixture& f);

}  // namespace mtk::ptf
