#include "mtk/ptf/fixtures.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "mtk/error.hpp"

namespace mtk::ptf {

namespace {

std::int64_t element_count(const std::vector<std::int64_t>& shape) {
  std::int64_t n = 1;
  for (auto d : shape) {
    if (d < 0) throw ContractError("fixture shape has a negative dimension");
    n *= d;
  }
  return n;
}

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xff) << (8 * (7 - i));
  return r;
}

}  // namespace

void write_fixture(const std::string& stem, const Fixture& f) {
  if (element_count(f.shape) != static_cast<std::int64_t>(f.data.size()))
    throw ContractError("fixture data does not match its shape");
  std::ofstream bin(stem + ".bin", std::ios::binary);
  if (!bin) throw Error("cannot write " + stem + ".bin");
  for (double x : f.data) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, 8);
    bits = to_le(bits);
    bin.write(reinterpret_cast<const char*>(&bits), 8);
  }
  nlohmann::ordered_json j;
  j["dtype"] = "f64";
  j["byte_order"] = "little";
  j["order"] = "row_major";
  j["shape"] = f.shape;
  std::ofstream js(stem + ".json");
  if (!js) throw Error("cannot write " + stem + ".json");
  js << j.dump(2) << "\n";
}

Fixture read_fixture(const std::string& stem) {
  std::ifstream js(stem + ".json");
  if (!js) throw Error("cannot open " + stem + ".json");
  Fixture f;
  try {
    const auto j = nlohmann::json::parse(js);
    if (j.at("dtype") != "f64") throw ContractError("fixture dtype must be f64");
    f.shape = j.at("shape").get<std::vector<std::int64_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw ContractError("bad fixture manifest " + stem + ".json: " + e.what());
  }
  const std::int64_t n = element_count(f.shape);
  std::ifstream bin(stem + ".bin", std::ios::binary);
  if (!bin) throw Error("cannot open " + stem + ".bin");
  f.data.resize(static_cast<std::size_t>(n));
  for (auto& x : f.data) {
    std::uint64_t bits = 0;
    if (!bin.read(reinterpret_cast<char*>(&bits), 8))
      throw ContractError("fixture " + stem + ".bin is shorter than its shape");
    bits = to_le(bits);
    std::memcpy(&x, &bits, 8);
  }
  if (bin.peek() != std::char_traits<char>::eof())
    throw ContractError("fixture " + stem + ".bin is longer than its shape");
  return f;
}

Fixture to_fixture(const MatrixXd& m) {
  Fixture f;
  f.shape = {m.rows(), m.cols()};
  f.data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) f.data.push_back(m(r, c));
  return f;
}

MatrixXd to_matrix(const Fixture& f) {
  if (f.shape.size() != 2) throw ContractError("matrix fixture must be rank 2");
  MatrixXd m(f.shape[0], f.shape[1]);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = f.data[k++];
  return m;
}

}  // namespace mtk::ptf
